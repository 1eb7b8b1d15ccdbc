// _edccf — pybind11 bindings for the detection fusion toolkit.
//
// Exposes the domain types and the main operations (evaluation, error
// decomposition, fusion operators, policy derivation/application,
// calibration, statistics, synthetic scenarios). Container fields convert
// to/from native Python objects by value, so mutate-and-assign rather than
// mutating a returned container in place.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edccf/calibration.hpp"
#include "edccf/dataset_io.hpp"
#include "edccf/error_decomposition.hpp"
#include "edccf/fusion_ops.hpp"
#include "edccf/matching.hpp"
#include "edccf/policy.hpp"
#include "edccf/stats.hpp"
#include "edccf/synthetic.hpp"
#include "edccf/types.hpp"

namespace py = pybind11;
using namespace edccf;

PYBIND11_MODULE(_edccf, m) {
  m.doc() = "Error-decomposed, class-conditional detection fusion";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  // --- core types -----------------------------------------------------------
  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) {
             return Box{x, y, w, h};
           }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &Box::x)
      .def_readwrite("y", &Box::y)
      .def_readwrite("w", &Box::w)
      .def_readwrite("h", &Box::h)
      .def("area", &Box::area)
      .def("valid", &Box::valid)
      .def("__eq__", [](const Box& a, const Box& b) { return a == b; })
      .def("__repr__", [](const Box& b) {
        return "Box(x=" + std::to_string(b.x) + ", y=" + std::to_string(b.y) +
               ", w=" + std::to_string(b.w) + ", h=" + std::to_string(b.h) + ")";
      });

  py::class_<Detection>(m, "Detection")
      .def(py::init<>())
      .def(py::init([](std::string class_code, Box box, double score) {
             return Detection{std::move(class_code), box, score};
           }),
           py::arg("class_code"), py::arg("box"), py::arg("score"))
      .def_readwrite("class_code", &Detection::class_code)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score)
      .def("__eq__",
           [](const Detection& a, const Detection& b) { return a == b; });

  py::class_<GtInstance>(m, "GtInstance")
      .def(py::init<>())
      .def(py::init([](std::string class_code, Box box) {
             return GtInstance{std::move(class_code), box};
           }),
           py::arg("class_code"), py::arg("box"))
      .def_readwrite("class_code", &GtInstance::class_code)
      .def_readwrite("box", &GtInstance::box);

  py::class_<ClassVocabulary>(m, "ClassVocabulary")
      .def(py::init<std::vector<std::string>>(), py::arg("codes"))
      .def_static("road_distress", &ClassVocabulary::road_distress,
                  py::return_value_policy::reference)
      .def("codes", &ClassVocabulary::codes)
      .def("size", &ClassVocabulary::size)
      .def("contains", &ClassVocabulary::contains, py::arg("code"));

  py::class_<BranchPredictions>(m, "BranchPredictions")
      .def(py::init<>())
      .def_readwrite("branch_id", &BranchPredictions::branch_id)
      .def_readwrite("per_image", &BranchPredictions::per_image);

  py::class_<GroundTruthSet>(m, "GroundTruthSet")
      .def(py::init<>())
      .def_readwrite("per_image", &GroundTruthSet::per_image);

  py::class_<EvalResult>(m, "EvalResult")
      .def(py::init<>())
      .def_readonly("per_class_ap50", &EvalResult::per_class_ap50)
      .def_readonly("per_class_ap5095", &EvalResult::per_class_ap5095)
      .def_readonly("map50", &EvalResult::map50)
      .def_readonly("map5095", &EvalResult::map5095)
      .def_readonly("n_images", &EvalResult::n_images);

  // --- file I/O --------------------------------------------------------------
  py::enum_<BoxFormat>(m, "BoxFormat")
      .value("XYWH", BoxFormat::XYWH)
      .value("XYXY", BoxFormat::XYXY);

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("load_predictions", &load_predictions, py::arg("path"),
        py::arg("vocab"), py::arg("manifest"),
        py::arg("format") = BoxFormat::XYWH);
  m.def("load_ground_truth", &load_ground_truth, py::arg("path"),
        py::arg("vocab"), py::arg("manifest"),
        py::arg("format") = BoxFormat::XYWH);
  m.def("save_predictions", &save_predictions, py::arg("path"),
        py::arg("preds"));
  m.def("save_ground_truth", &save_ground_truth, py::arg("path"),
        py::arg("gt"));
  m.def("save_manifest", &save_manifest, py::arg("path"), py::arg("ids"));
  m.def("sha256_hex", &sha256_hex, py::arg("data"));

  // --- evaluation ------------------------------------------------------------
  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("evaluate", &evaluate, py::arg("preds"), py::arg("gt"),
        py::arg("vocab"));

  // --- error decomposition ----------------------------------------------------
  py::class_<ErrorBucketCounts>(m, "ErrorBucketCounts")
      .def(py::init<>())
      .def(py::init([](long long pa, long long wc, long long cs, long long ld) {
             ErrorBucketCounts c;
             c.n_pa = pa;
             c.n_wc = wc;
             c.n_cs = cs;
             c.n_ld = ld;
             return c;
           }),
           py::arg("n_pa"), py::arg("n_wc"), py::arg("n_cs"), py::arg("n_ld"))
      .def_readwrite("n_pa", &ErrorBucketCounts::n_pa)
      .def_readwrite("n_wc", &ErrorBucketCounts::n_wc)
      .def_readwrite("n_cs", &ErrorBucketCounts::n_cs)
      .def_readwrite("n_ld", &ErrorBucketCounts::n_ld)
      .def("total", &ErrorBucketCounts::total);

  py::class_<DecompositionThresholds>(m, "DecompositionThresholds")
      .def(py::init<>())
      .def_readwrite("sigma_op", &DecompositionThresholds::sigma_op)
      .def_readwrite("iou_tp", &DecompositionThresholds::iou_tp)
      .def_readwrite("iou_pa", &DecompositionThresholds::iou_pa);

  m.def("decompose_errors", &decompose_errors, py::arg("preds"), py::arg("gt"),
        py::arg("vocab"), py::arg("thresholds") = DecompositionThresholds{});
  m.def("hcec", &hcec, py::arg("counts"), py::arg("eps") = 1e-9);
  m.def("bsr", &bsr, py::arg("map_all_global_best"),
        py::arg("map_all_class_best"), py::arg("eps") = 1e-9);

  py::class_<BranchRoleAudit>(m, "BranchRoleAudit")
      .def(py::init<>())
      .def_readonly("global_best", &BranchRoleAudit::global_best)
      .def_readonly("class_best", &BranchRoleAudit::class_best)
      .def_readonly("map_all_by_branch", &BranchRoleAudit::map_all_by_branch)
      .def_readonly("ap50_by_branch", &BranchRoleAudit::ap50_by_branch)
      .def_readonly("branch_order", &BranchRoleAudit::branch_order);

  m.def("audit_branches", &audit_branches, py::arg("branches"), py::arg("gt"),
        py::arg("vocab"));

  py::enum_<DominantMode>(m, "DominantMode")
      .value("PaWc", DominantMode::PaWc)
      .value("Pa", DominantMode::Pa)
      .value("Wc", DominantMode::Wc)
      .value("Cs", DominantMode::Cs)
      .value("Ld", DominantMode::Ld)
      .value("Mixed", DominantMode::Mixed)
      .value("LowError", DominantMode::LowError);

  py::enum_<ClassVocabulary::Role>(m, "Role")
      .value("Stable", ClassVocabulary::Role::Stable)
      .value("Hard", ClassVocabulary::Role::Hard);

  py::class_<ClassReliabilityProfile>(m, "ClassReliabilityProfile")
      .def(py::init<>())
      .def_readwrite("class_code", &ClassReliabilityProfile::class_code)
      .def_readwrite("ap50", &ClassReliabilityProfile::ap50)
      .def_readwrite("hcec", &ClassReliabilityProfile::hcec)
      .def_readwrite("bsr", &ClassReliabilityProfile::bsr)
      .def_readwrite("role", &ClassReliabilityProfile::role)
      .def_readwrite("preferred_branch",
                     &ClassReliabilityProfile::preferred_branch)
      .def_readwrite("dominant_mode", &ClassReliabilityProfile::dominant_mode);

  py::class_<RoleConfig>(m, "RoleConfig")
      .def(py::init<>())
      .def_readwrite("tau_hard", &RoleConfig::tau_hard)
      .def_readwrite("eps", &RoleConfig::eps)
      .def_readwrite("low_error_floor", &RoleConfig::low_error_floor);

  m.def("classify_roles", &classify_roles, py::arg("audit"), py::arg("buckets"),
        py::arg("config") = RoleConfig{});

  // --- fusion operators --------------------------------------------------------
  py::enum_<SoftNmsMode>(m, "SoftNmsMode")
      .value("Linear", SoftNmsMode::Linear)
      .value("Gaussian", SoftNmsMode::Gaussian);

  m.def("nms", &nms, py::arg("dets"), py::arg("iou_thresh"));
  m.def("soft_nms", &soft_nms, py::arg("dets"), py::arg("sigma_or_slope"),
        py::arg("mode") = SoftNmsMode::Linear, py::arg("score_floor") = 1e-3);

  py::class_<FusionWeights>(m, "FusionWeights")
      .def(py::init<>())
      .def(py::init([](std::map<std::string, double> per_branch) {
             FusionWeights w;
             w.per_branch = std::move(per_branch);
             return w;
           }),
           py::arg("per_branch"))
      .def_readwrite("per_branch", &FusionWeights::per_branch);

  py::class_<ClusterMember>(m, "ClusterMember")
      .def_readonly("branch_id", &ClusterMember::branch_id)
      .def_readonly("det_index", &ClusterMember::det_index)
      .def_readonly("weight", &ClusterMember::weight);

  py::class_<ClusterTrace>(m, "ClusterTrace")
      .def_readonly("fused", &ClusterTrace::fused)
      .def_readonly("members", &ClusterTrace::members);

  m.def("wbf", &wbf, py::arg("branch_dets"), py::arg("weights"),
        py::arg("iou_cluster"), py::arg("score_floor") = 1e-3);
  m.def("union_low_threshold", &union_low_threshold, py::arg("global_dets"),
        py::arg("repair_dets"), py::arg("sigma_c"), py::arg("dedup_iou"));

  // --- policy -------------------------------------------------------------------
  py::enum_<ArmKind>(m, "ArmKind")
      .value("KeepGlobal", ArmKind::KeepGlobal)
      .value("UnionLowThreshold", ArmKind::UnionLowThreshold)
      .value("ScoreReprojection", ArmKind::ScoreReprojection)
      .value("LowWeightWbf", ArmKind::LowWeightWbf);

  py::class_<PolicyArm>(m, "PolicyArm")
      .def(py::init<>())
      .def_readwrite("kind", &PolicyArm::kind)
      .def_readwrite("sigma_c", &PolicyArm::sigma_c)
      .def_readwrite("a", &PolicyArm::a)
      .def_readwrite("b", &PolicyArm::b)
      .def_readwrite("w_c", &PolicyArm::w_c);

  py::class_<ArmProvenance>(m, "ArmProvenance")
      .def(py::init<>())
      .def_readwrite("buckets", &ArmProvenance::buckets)
      .def_readwrite("hcec", &ArmProvenance::hcec)
      .def_readwrite("bsr", &ArmProvenance::bsr)
      .def_readwrite("note", &ArmProvenance::note);

  py::class_<FusionPolicy>(m, "FusionPolicy")
      .def(py::init<>())
      .def_readwrite("per_class", &FusionPolicy::per_class)
      .def_readwrite("tau_c", &FusionPolicy::tau_c)
      .def_readwrite("provenance", &FusionPolicy::provenance);

  py::class_<PolicyConfig>(m, "PolicyConfig")
      .def(py::init<>())
      .def_readwrite("tau_hard", &PolicyConfig::tau_hard)
      .def_readwrite("sigma_c", &PolicyConfig::sigma_c)
      .def_readwrite("w_c", &PolicyConfig::w_c)
      .def_readwrite("reproj_a", &PolicyConfig::reproj_a)
      .def_readwrite("reproj_b", &PolicyConfig::reproj_b)
      .def_readwrite("dedup_iou", &PolicyConfig::dedup_iou)
      .def_readwrite("wbf_iou_cluster", &PolicyConfig::wbf_iou_cluster)
      .def_readwrite("wbf_score_floor", &PolicyConfig::wbf_score_floor)
      .def_readwrite("activation_hcec_gate", &PolicyConfig::activation_hcec_gate)
      .def_readwrite("require_activation_gate",
                     &PolicyConfig::require_activation_gate)
      .def_readwrite("severity_ordered_arms",
                     &PolicyConfig::severity_ordered_arms);

  m.def("derive_policy", &derive_policy, py::arg("profiles"),
        py::arg("buckets"), py::arg("config") = PolicyConfig{});

  py::class_<FusedOutput>(m, "FusedOutput")
      .def(py::init<>())
      .def_readonly("detections", &FusedOutput::detections)
      .def_readonly("policy", &FusedOutput::policy)
      .def_readonly("source_attribution", &FusedOutput::source_attribution);

  m.def("apply_policy", &apply_policy, py::arg("policy"),
        py::arg("global_branch"), py::arg("repair_branches"), py::arg("vocab"),
        py::arg("config") = PolicyConfig{});

  py::class_<PreservationReport::Entry>(m, "PreservationEntry")
      .def_readonly("class_code", &PreservationReport::Entry::class_code)
      .def_readonly("before", &PreservationReport::Entry::before)
      .def_readonly("after", &PreservationReport::Entry::after);

  py::class_<PreservationReport>(m, "PreservationReport")
      .def(py::init<>())
      .def_readonly("stable_regressions",
                    &PreservationReport::stable_regressions)
      .def_readonly("hard_not_improved", &PreservationReport::hard_not_improved)
      .def("satisfied", &PreservationReport::satisfied);

  m.def("verify_preservation", &verify_preservation, py::arg("before"),
        py::arg("after"), py::arg("hard_classes"), py::arg("tol") = 0.0);

  // --- calibration -----------------------------------------------------------
  py::class_<LabeledScore>(m, "LabeledScore")
      .def(py::init<>())
      .def(py::init([](double score, bool is_tp) {
             return LabeledScore{score, is_tp};
           }),
           py::arg("score"), py::arg("is_tp"))
      .def_readwrite("score", &LabeledScore::score)
      .def_readwrite("is_tp", &LabeledScore::is_tp);

  m.def("label_class_detections", &label_class_detections, py::arg("preds"),
        py::arg("gt"), py::arg("class_code"), py::arg("iou_tp") = 0.50);

  py::class_<CrcConfig>(m, "CrcConfig")
      .def(py::init<>())
      .def_readwrite("grad_tol", &CrcConfig::grad_tol)
      .def_readwrite("max_iters", &CrcConfig::max_iters)
      .def_readwrite("slope_cap", &CrcConfig::slope_cap);

  py::class_<CalibrationFit>(m, "CalibrationFit")
      .def(py::init<>())
      .def_readonly("class_code", &CalibrationFit::class_code)
      .def_readonly("a", &CalibrationFit::a)
      .def_readonly("b", &CalibrationFit::b)
      .def_readonly("fit_loss", &CalibrationFit::fit_loss)
      .def_readonly("holdout_ap_delta", &CalibrationFit::holdout_ap_delta)
      .def_readonly("converged", &CalibrationFit::converged)
      .def_readonly("iterations", &CalibrationFit::iterations);

  m.def("fit_crc", &fit_crc, py::arg("labeled"), py::arg("class_code"),
        py::arg("split_fraction"), py::arg("seed"),
        py::arg("config") = CrcConfig{});
  m.def("apply_crc", &apply_crc, py::arg("preds"), py::arg("class_code"),
        py::arg("a"), py::arg("b"));

  py::class_<RcvConfig>(m, "RcvConfig")
      .def(py::init<>())
      .def_readwrite("iou_cluster", &RcvConfig::iou_cluster)
      .def_readwrite("score_floor", &RcvConfig::score_floor);

  py::class_<RouteSweep>(m, "RouteSweep")
      .def(py::init<>())
      .def_readonly("hard_class", &RouteSweep::hard_class)
      .def_readonly("alphas", &RouteSweep::alphas)
      .def_readonly("per_alpha", &RouteSweep::per_alpha)
      .def_readonly("best_alpha", &RouteSweep::best_alpha)
      .def_readonly("best_matches_baseline", &RouteSweep::best_matches_baseline)
      .def_readonly("hard_ap_gain_over_baseline",
                    &RouteSweep::hard_ap_gain_over_baseline);

  m.def("rcv_sweep", &rcv_sweep, py::arg("global_branch"),
        py::arg("candidate_branch"), py::arg("gt"), py::arg("vocab"),
        py::arg("hard_class"),
        py::arg("alphas") = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0},
        py::arg("config") = RcvConfig{});

  // --- statistics ---------------------------------------------------------------
  py::class_<TrialRow>(m, "TrialRow")
      .def_readonly("trial", &TrialRow::trial)
      .def_readonly("seed", &TrialRow::seed)
      .def_readonly("metric", &TrialRow::metric)
      .def_readonly("value_baseline", &TrialRow::value_baseline)
      .def_readonly("value_candidate", &TrialRow::value_candidate)
      .def_readonly("delta", &TrialRow::delta);

  py::class_<PairedTrialTable>(m, "PairedTrialTable")
      .def(py::init<>())
      .def_readonly("rows", &PairedTrialTable::rows)
      .def_readonly("n_trials", &PairedTrialTable::n_trials)
      .def_readonly("subset_size", &PairedTrialTable::subset_size)
      .def_readonly("metrics", &PairedTrialTable::metrics);

  m.def("subset_trials", &subset_trials, py::arg("baseline"),
        py::arg("candidate"), py::arg("gt"), py::arg("vocab"),
        py::arg("n_trials"), py::arg("subset_size"), py::arg("base_seed"),
        py::arg("class_ap_metrics") = std::vector<std::string>{});

  py::class_<WilcoxonResult>(m, "WilcoxonResult")
      .def_readonly("statistic", &WilcoxonResult::statistic)
      .def_readonly("p_raw", &WilcoxonResult::p_raw)
      .def_readonly("n_used", &WilcoxonResult::n_used)
      .def_readonly("all_zero", &WilcoxonResult::all_zero);

  m.def("wilcoxon_one_sided", &wilcoxon_one_sided, py::arg("deltas"));
  m.def("bonferroni", &bonferroni, py::arg("p_raw"), py::arg("k_comparisons"));
  m.def("bootstrap_ci", &bootstrap_ci, py::arg("deltas"),
        py::arg("n_resamples"), py::arg("seed"), py::arg("level") = 0.95);
  m.def("five_fold", &five_fold, py::arg("manifest"), py::arg("seed"));

  py::class_<TestReport>(m, "TestReport")
      .def(py::init<>())
      .def_readonly("metric", &TestReport::metric)
      .def_readonly("n_trials", &TestReport::n_trials)
      .def_readonly("mean_delta", &TestReport::mean_delta)
      .def_readonly("win_rate", &TestReport::win_rate)
      .def_readonly("statistic", &TestReport::statistic)
      .def_readonly("p_raw", &TestReport::p_raw)
      .def_readonly("p_adjusted", &TestReport::p_adjusted)
      .def_readonly("k_comparisons", &TestReport::k_comparisons)
      .def_readonly("direction", &TestReport::direction)
      .def_readonly("ci_lo", &TestReport::ci_lo)
      .def_readonly("ci_hi", &TestReport::ci_hi)
      .def_readonly("ci_level", &TestReport::ci_level)
      .def_readonly("n_resamples", &TestReport::n_resamples)
      .def_readonly("all_zero", &TestReport::all_zero);

  m.def("report", &report, py::arg("table"), py::arg("k_comparisons") = 15,
        py::arg("n_resamples") = 1000, py::arg("seed") = 0,
        py::arg("level") = 0.95);
  m.def("trials_to_csv",
        static_cast<std::string (*)(const PairedTrialTable&)>(&to_csv),
        py::arg("table"));
  m.def("reports_to_csv",
        static_cast<std::string (*)(const std::map<std::string, TestReport>&)>(
            &to_csv),
        py::arg("reports"));
  m.def("reports_to_json",
        static_cast<std::string (*)(const std::map<std::string, TestReport>&)>(
            &to_json),
        py::arg("reports"));

  // --- synthetic scenarios ------------------------------------------------------
  py::class_<BoxCount>(m, "BoxCount")
      .def(py::init<>())
      .def(py::init([](int lo, int hi) { return BoxCount{lo, hi}; }),
           py::arg("min_boxes"), py::arg("max_boxes"))
      .def_readwrite("min_boxes", &BoxCount::min_boxes)
      .def_readwrite("max_boxes", &BoxCount::max_boxes);

  py::class_<BranchProfile>(m, "BranchProfile")
      .def(py::init<>())
      .def_readwrite("branch_id", &BranchProfile::branch_id)
      .def_readwrite("recall", &BranchProfile::recall)
      .def_readwrite("precision", &BranchProfile::precision)
      .def_readwrite("default_recall", &BranchProfile::default_recall)
      .def_readwrite("default_precision", &BranchProfile::default_precision)
      .def_readwrite("jitter", &BranchProfile::jitter)
      .def_readwrite("score_noise", &BranchProfile::score_noise)
      .def_readwrite("order_preserving", &BranchProfile::order_preserving)
      .def_readwrite("suppressed_score_frac",
                     &BranchProfile::suppressed_score_frac);

  m.def("default_class_distribution", &default_class_distribution);
  m.def("generate_scene", &generate_scene, py::arg("class_distribution"),
        py::arg("n_images"), py::arg("boxes") = BoxCount{},
        py::arg("seed") = 0);
  m.def("simulate_branch", &simulate_branch, py::arg("gt"), py::arg("vocab"),
        py::arg("profile"), py::arg("seed"));

  py::class_<DominanceResult>(m, "DominanceResult")
      .def_readonly("ap_uniform", &DominanceResult::ap_uniform)
      .def_readonly("ap_class_weighted", &DominanceResult::ap_class_weighted)
      .def_readonly("precision_variance", &DominanceResult::precision_variance)
      .def_readonly("added_recall", &DominanceResult::added_recall)
      .def_readonly("strict_gain", &DominanceResult::strict_gain)
      .def_readonly("calibration_order_preserved",
                    &DominanceResult::calibration_order_preserved);

  m.def("dominance_experiment", &dominance_experiment, py::arg("gt"),
        py::arg("branches"), py::arg("hard_class"), py::arg("vocab"),
        py::arg("iou_cluster") = 0.55);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n_images", &ScenarioConfig::n_images)
      .def_readwrite("boxes", &ScenarioConfig::boxes)
      .def_readwrite("hard_class", &ScenarioConfig::hard_class)
      .def_readwrite("n_trials", &ScenarioConfig::n_trials)
      .def_readwrite("subset_size", &ScenarioConfig::subset_size)
      .def_readwrite("k_comparisons", &ScenarioConfig::k_comparisons)
      .def_readwrite("n_resamples", &ScenarioConfig::n_resamples)
      .def_readwrite("policy", &ScenarioConfig::policy);

  py::class_<ScenarioBundle>(m, "ScenarioBundle")
      .def_readonly("gt", &ScenarioBundle::gt)
      .def_readonly("global_branch", &ScenarioBundle::global_branch)
      .def_readonly("specialist_branch", &ScenarioBundle::specialist_branch)
      .def_readonly("buckets", &ScenarioBundle::buckets)
      .def_readonly("audit", &ScenarioBundle::audit)
      .def_readonly("profiles", &ScenarioBundle::profiles)
      .def_readonly("policy", &ScenarioBundle::policy)
      .def_readonly("fused", &ScenarioBundle::fused)
      .def_readonly("eval_before", &ScenarioBundle::eval_before)
      .def_readonly("eval_after", &ScenarioBundle::eval_after)
      .def_readonly("hard_classes", &ScenarioBundle::hard_classes)
      .def_readonly("preservation", &ScenarioBundle::preservation)
      .def_readonly("trials", &ScenarioBundle::trials)
      .def_readonly("reports", &ScenarioBundle::reports);

  m.def("hcrp_end_to_end", &hcrp_end_to_end, py::arg("seed"),
        py::arg("config") = ScenarioConfig{});
  m.def("naive_evaluate", &naive_evaluate, py::arg("preds"), py::arg("gt"),
        py::arg("vocab"));
}
