// edccf — command-line front end for the detection fusion toolkit.
//
// One binary with sub-commands (audit, evaluate, decompose, fuse, edccf,
// calibrate, stats, synth, report, bench). Every run writes its results
// plus a run_manifest.json recording the tool version, the fully-resolved
// configuration and its hash, SHA-256 digests of every input file, and
// per-stage wall-clock timings. Two runs with the same config hash and
// input digests produce byte-identical result files; the timing fields of
// the manifest are the only nondeterministic output.
//
// Exit codes: 0 success, 2 usage error, 3 data error (unreadable/invalid
// inputs), 4 protocol violation (currently: `edccf --strict` when the
// preservation contract fails).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edccf/calibration.hpp"
#include "edccf/dataset_io.hpp"
#include "edccf/error_decomposition.hpp"
#include "edccf/fusion_ops.hpp"
#include "edccf/matching.hpp"
#include "edccf/policy.hpp"
#include "edccf/stats.hpp"
#include "edccf/synthetic.hpp"
#include "edccf/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edccf;

namespace {

// ---------------------------------------------------------------------------
// Small utilities

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Accumulates everything run_manifest.json needs.
struct RunContext {
  std::string command;
  fs::path out_dir = ".";
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_ms;

  fs::path out_path(const std::string& name) const { return out_dir / name; }

  void write_text(const std::string& name, const std::string& body) {
    fs::create_directories(out_dir);
    const fs::path p = out_path(name);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ParseError("cannot open for writing: " + p.string());
    f << body;
    outputs.push_back(name);
  }

  void write_json(const std::string& name, const json& doc) {
    write_text(name, doc.dump(2) + "\n");
  }

  void write_manifest() {
    json digests = json::object();
    for (const auto& path : inputs) digests[path] = sha256_file(path);
    json manifest{{"tool_version", kVersion},
                  {"command", command},
                  {"config", config},
                  {"config_hash", sha256_hex(config.dump())},
                  {"inputs", digests},
                  {"outputs", outputs},
                  {"timings_ms", timings_ms}};
    // Written directly (not via write_text) so it never lists itself.
    fs::create_directories(out_dir);
    std::ofstream f(out_path("run_manifest.json"), std::ios::binary);
    if (!f)
      throw ParseError("cannot open for writing: " +
                       out_path("run_manifest.json").string());
    f << manifest.dump(2) << "\n";
  }
};

BoxFormat parse_box_format(const std::string& s) {
  if (s == "xywh") return BoxFormat::XYWH;
  if (s == "xyxy") return BoxFormat::XYXY;
  throw InvalidArgument("unknown box format: " + s + " (expected xywh or xyxy)");
}

// Shared loading boilerplate: manifest + ground truth + N prediction files.
struct LoadedData {
  std::vector<std::string> manifest;
  GroundTruthSet gt;
  std::vector<BranchPredictions> branches;
};

std::vector<std::string> load_manifest_tracked(RunContext& ctx,
                                               const std::string& path) {
  ctx.inputs.push_back(path);
  return load_manifest(path);
}

BranchPredictions load_predictions_tracked(RunContext& ctx,
                                           const std::string& path,
                                           const std::vector<std::string>& manifest,
                                           BoxFormat format) {
  ctx.inputs.push_back(path);
  return load_predictions(path, ClassVocabulary::road_distress(), manifest, format);
}

GroundTruthSet load_gt_tracked(RunContext& ctx, const std::string& path,
                               const std::vector<std::string>& manifest,
                               BoxFormat format) {
  ctx.inputs.push_back(path);
  return load_ground_truth(path, ClassVocabulary::road_distress(), manifest, format);
}

// "class=path" option values (repair branches, class-rate overrides).
std::pair<std::string, std::string> split_key_value(const std::string& s,
                                                    const std::string& what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw InvalidArgument(what + " must look like key=value, got: " + s);
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// ---------------------------------------------------------------------------
// JSON serializers for the result structs

json to_json(const Box& b) { return json{b.x, b.y, b.w, b.h}; }

json to_json(const EvalResult& e) {
  return json{{"map50", e.map50},
              {"map5095", e.map5095},
              {"n_images", e.n_images},
              {"per_class_ap50", e.per_class_ap50},
              {"per_class_ap5095", e.per_class_ap5095}};
}

json to_json(const ErrorBucketCounts& b) {
  return json{{"n_pa", b.n_pa}, {"n_wc", b.n_wc}, {"n_cs", b.n_cs},
              {"n_ld", b.n_ld}, {"total", b.total()}};
}

std::string role_name(ClassVocabulary::Role r) {
  return r == ClassVocabulary::Role::Hard ? "hard" : "stable";
}

json to_json(const ClassReliabilityProfile& p) {
  return json{{"class", p.class_code},
              {"ap50", p.ap50},
              {"hcec", p.hcec},
              {"bsr", p.bsr},
              {"role", role_name(p.role)},
              {"preferred_branch", p.preferred_branch},
              {"dominant_mode", to_string(p.dominant_mode)}};
}

json to_json(const BranchRoleAudit& a) {
  return json{{"global_best", a.global_best},
              {"class_best", a.class_best},
              {"map_all_by_branch", a.map_all_by_branch},
              {"ap50_by_branch", a.ap50_by_branch},
              {"branch_order", a.branch_order}};
}

json to_json(const FusionPolicy& p) {
  json per_class = json::object();
  for (const auto& [code, arm] : p.per_class)
    per_class[code] = json{{"arm", to_string(arm.kind)},
                           {"sigma_c", arm.sigma_c},
                           {"a", arm.a},
                           {"b", arm.b},
                           {"w_c", arm.w_c}};
  json provenance = json::object();
  for (const auto& [code, prov] : p.provenance)
    provenance[code] = json{{"buckets", to_json(prov.buckets)},
                            {"hcec", prov.hcec},
                            {"bsr", prov.bsr},
                            {"note", prov.note}};
  return json{{"per_class", per_class}, {"tau_c", p.tau_c},
              {"provenance", provenance}};
}

json to_json(const PreservationReport& r) {
  const auto entries = [](const std::vector<PreservationReport::Entry>& v) {
    json arr = json::array();
    for (const auto& e : v)
      arr.push_back(json{{"class", e.class_code}, {"before", e.before},
                         {"after", e.after}});
    return arr;
  };
  return json{{"satisfied", r.satisfied()},
              {"stable_regressions", entries(r.stable_regressions)},
              {"hard_not_improved", entries(r.hard_not_improved)}};
}

json to_json(const CalibrationFit& f) {
  return json{{"class", f.class_code},     {"a", f.a},
              {"b", f.b},                  {"fit_loss", f.fit_loss},
              {"holdout_ap_delta", f.holdout_ap_delta},
              {"converged", f.converged},  {"iterations", f.iterations}};
}

// One CSV row per evaluation: fixed columns then per-class columns in
// vocabulary order (classes without ground truth are absent).
std::string eval_csv(const EvalResult& e) {
  std::string header = "map50,map5095,n_images";
  std::string row = fmt17(e.map50) + "," + fmt17(e.map5095) + "," +
                    std::to_string(e.n_images);
  for (const auto& code : ClassVocabulary::road_distress().codes()) {
    const auto it = e.per_class_ap50.find(code);
    if (it == e.per_class_ap50.end()) continue;
    header += ",ap50:" + code + ",ap5095:" + code;
    row += "," + fmt17(it->second) + "," + fmt17(e.per_class_ap5095.at(code));
  }
  return header + "\n" + row + "\n";
}

// ---------------------------------------------------------------------------
// audit

struct AuditOptions {
  std::string pred_path, manifest_path;
  std::string train_manifest, val_manifest, hashes_path, hash_dir;
};

int run_audit(RunContext& ctx, const AuditOptions& opt) {
  json result = json::object();

  if (!opt.pred_path.empty()) {
    Stopwatch sw;
    const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
    ctx.inputs.push_back(opt.pred_path);
    const IntegrityReport rep = check_integrity(opt.pred_path, manifest);
    json violations = json::array();
    for (const auto& [id, why] : rep.schema_violations)
      violations.push_back(json{{"image", id}, {"reason", why}});
    result["integrity"] = json{{"clean", rep.clean()},
                               {"missing_images", rep.missing_images},
                               {"extra_images", rep.extra_images},
                               {"duplicate_image_ids", rep.duplicate_image_ids},
                               {"schema_violations", violations}};
    ctx.timings_ms["integrity"] = sw.ms();
  }

  if (!opt.train_manifest.empty() || !opt.val_manifest.empty()) {
    if (opt.train_manifest.empty() || opt.val_manifest.empty() ||
        (opt.hashes_path.empty() && opt.hash_dir.empty()))
      throw InvalidArgument(
          "overlap audit needs --train-manifest, --val-manifest, and one of "
          "--hashes/--hash-dir");
    Stopwatch sw;
    const auto train_ids = load_manifest_tracked(ctx, opt.train_manifest);
    const auto val_ids = load_manifest_tracked(ctx, opt.val_manifest);

    std::map<std::string, std::string> hashes;
    if (!opt.hashes_path.empty()) {
      ctx.inputs.push_back(opt.hashes_path);
      std::ifstream f(opt.hashes_path, std::ios::binary);
      if (!f) throw ParseError("cannot read: " + opt.hashes_path);
      json doc;
      try {
        doc = json::parse(f);
      } catch (const json::exception& e) {
        throw SchemaError(opt.hashes_path + ": " + e.what());
      }
      if (!doc.is_object())
        throw SchemaError(opt.hashes_path + ": expected {image-id: hash}");
      for (const auto& [id, h] : doc.items()) {
        if (!h.is_string())
          throw SchemaError(opt.hashes_path + ": hash for " + id +
                            " must be a string");
        hashes[id] = h.get<std::string>();
      }
    } else {
      // Ids hash to the digest of the file named exactly like them inside
      // --hash-dir; ids without a file are skipped (consistent with
      // overlap_audit's missing-hash rule).
      for (const auto* ids : {&train_ids, &val_ids})
        for (const auto& id : *ids) {
          const fs::path p = fs::path(opt.hash_dir) / id;
          if (fs::is_regular_file(p) && !hashes.count(id))
            hashes[id] = sha256_file(p.string());
        }
    }

    const auto pairs = overlap_audit(train_ids, val_ids, hashes);
    json arr = json::array();
    for (const auto& [a, b] : pairs)
      arr.push_back(json{{"train", a}, {"val", b}});
    result["overlap"] = json{{"n_pairs", pairs.size()}, {"pairs", arr}};
    ctx.timings_ms["overlap"] = sw.ms();
  }

  if (result.empty())
    throw InvalidArgument(
        "nothing to audit: give --pred/--manifest and/or the overlap flags");

  result["config"] = ctx.config;
  ctx.write_json("audit_report.json", result);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string pred_path, gt_path, manifest_path;
  std::string box_format = "xywh";
};

int run_evaluate(RunContext& ctx, const EvaluateOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  const auto preds = load_predictions_tracked(ctx, opt.pred_path, manifest, fmt);
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);
  ctx.timings_ms["load"] = load_sw.ms();

  Stopwatch eval_sw;
  const EvalResult result = evaluate(preds, gt, ClassVocabulary::road_distress());
  ctx.timings_ms["evaluate"] = eval_sw.ms();

  json doc = to_json(result);
  doc["config"] = ctx.config;
  ctx.write_json("eval.json", doc);
  ctx.write_text("eval.csv", eval_csv(result));
  return 0;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
  std::string pred_path, gt_path, manifest_path;
  std::vector<std::string> extra_branches;  // id=path
  std::string box_format = "xywh";
  double sigma_op = 0.25, iou_tp = 0.50, iou_pa = 0.10;
  double tau_hard = 0.30;
};

int run_decompose(RunContext& ctx, const DecomposeOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  auto main_branch = load_predictions_tracked(ctx, opt.pred_path, manifest, fmt);
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);

  std::vector<BranchPredictions> branches{main_branch};
  for (const auto& spec : opt.extra_branches) {
    const auto [branch_id, path] = split_key_value(spec, "--branch");
    auto extra = load_predictions_tracked(ctx, path, manifest, fmt);
    extra.branch_id = branch_id;
    branches.push_back(std::move(extra));
  }
  ctx.timings_ms["load"] = load_sw.ms();

  Stopwatch compute_sw;
  const auto& vocab = ClassVocabulary::road_distress();
  DecompositionThresholds thresholds;
  thresholds.sigma_op = opt.sigma_op;
  thresholds.iou_tp = opt.iou_tp;
  thresholds.iou_pa = opt.iou_pa;
  const auto buckets = decompose_errors(main_branch, gt, vocab, thresholds);
  const auto audit = audit_branches(branches, gt, vocab);
  RoleConfig role_config;
  role_config.tau_hard = opt.tau_hard;
  const auto profiles = classify_roles(audit, buckets, role_config);
  ctx.timings_ms["decompose"] = compute_sw.ms();

  std::string csv = "class,hcec,bsr,dominant_mode\n";
  json profile_doc = json::object();
  for (const auto& code : vocab.codes()) {
    const auto it = profiles.find(code);
    if (it == profiles.end()) continue;
    const ClassReliabilityProfile& p = it->second;
    csv += code + "," + fmt17(p.hcec) + "," + fmt17(p.bsr) + "," +
           to_string(p.dominant_mode) + "\n";
    json entry = to_json(p);
    entry["buckets"] = to_json(buckets.at(code));
    profile_doc[code] = std::move(entry);
  }
  ctx.write_text("decompose.csv", csv);
  ctx.write_json("decompose.json",
                 json{{"profiles", profile_doc},
                      {"audit", to_json(audit)},
                      {"config", ctx.config}});
  return 0;
}

// ---------------------------------------------------------------------------
// fuse

struct FuseOptions {
  std::string op;
  std::vector<std::string> pred_paths;
  std::string manifest_path;
  std::string box_format = "xywh";
  double iou = 0.5;            // nms keep threshold
  double sigma = 0.5;          // soft-nms sigma (gaussian) or slope (linear)
  std::string mode = "linear"; // soft-nms decay
  double score_floor = 1e-3;
  double iou_cluster = 0.55;   // wbf
  std::vector<double> weights; // wbf, defaults to uniform
  double sigma_c = 0.10;       // union low-score floor
  double dedup_iou = 0.55;     // union duplicate suppression
};

int run_fuse(RunContext& ctx, const FuseOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  std::vector<BranchPredictions> branches;
  for (const auto& path : opt.pred_paths)
    branches.push_back(load_predictions_tracked(ctx, path, manifest, fmt));
  ctx.timings_ms["load"] = load_sw.ms();

  const auto expect_branches = [&](std::size_t lo, std::size_t hi) {
    if (branches.size() < lo || branches.size() > hi)
      throw InvalidArgument("--op " + opt.op + " takes " + std::to_string(lo) +
                            (hi == lo ? "" : ".." + std::to_string(hi)) +
                            " --pred inputs, got " +
                            std::to_string(branches.size()));
  };

  Stopwatch fuse_sw;
  const auto& vocab = ClassVocabulary::road_distress();
  BranchPredictions fused;
  fused.branch_id = "fused-" + opt.op;

  // Every operator runs per image, per class (vocabulary order), and the
  // outputs are concatenated; that keeps single-class operator contracts
  // intact on multi-class files.
  const auto per_class = [&](const std::vector<Detection>& dets,
                             const std::string& code) {
    std::vector<Detection> out;
    for (const auto& d : dets)
      if (d.class_code == code) out.push_back(d);
    return out;
  };

  if (opt.op == "nms" || opt.op == "softnms") {
    expect_branches(1, 1);
    for (const auto& id : manifest) {
      std::vector<Detection> image_out;
      for (const auto& code : vocab.codes()) {
        auto dets = per_class(branches[0].per_image.at(id), code);
        if (dets.empty()) continue;
        std::vector<Detection> kept;
        if (opt.op == "nms") {
          kept = nms(dets, opt.iou);
        } else {
          const SoftNmsMode mode = opt.mode == "gaussian"
                                       ? SoftNmsMode::Gaussian
                                       : SoftNmsMode::Linear;
          if (opt.mode != "gaussian" && opt.mode != "linear")
            throw InvalidArgument("--mode must be linear or gaussian");
          kept = soft_nms(dets, opt.sigma, mode, opt.score_floor);
        }
        image_out.insert(image_out.end(), kept.begin(), kept.end());
      }
      fused.per_image[id] = std::move(image_out);
    }
  } else if (opt.op == "wbf") {
    expect_branches(2, branches.size() < 2 ? 2 : branches.size());
    FusionWeights weights;
    if (!opt.weights.empty() && opt.weights.size() != branches.size())
      throw InvalidArgument("--weights must list one value per --pred");
    for (std::size_t i = 0; i < branches.size(); ++i)
      weights.per_branch[branches[i].branch_id] =
          opt.weights.empty() ? 1.0 : opt.weights[i];
    if (weights.per_branch.size() != branches.size())
      throw InvalidArgument("duplicate branch ids among --pred inputs");
    for (const auto& id : manifest) {
      std::vector<Detection> image_out;
      for (const auto& code : vocab.codes()) {
        std::vector<std::pair<std::string, std::vector<Detection>>> inputs;
        bool any = false;
        for (const auto& b : branches) {
          auto dets = per_class(b.per_image.at(id), code);
          any = any || !dets.empty();
          inputs.emplace_back(b.branch_id, std::move(dets));
        }
        if (!any) continue;
        for (const auto& cluster :
             wbf(inputs, weights, opt.iou_cluster, opt.score_floor))
          image_out.push_back(cluster.fused);
      }
      fused.per_image[id] = std::move(image_out);
    }
  } else if (opt.op == "union") {
    expect_branches(2, 2);
    for (const auto& id : manifest) {
      std::vector<Detection> image_out;
      for (const auto& code : vocab.codes()) {
        auto global_dets = per_class(branches[0].per_image.at(id), code);
        auto repair_dets = per_class(branches[1].per_image.at(id), code);
        if (global_dets.empty() && repair_dets.empty()) continue;
        auto merged = union_low_threshold(global_dets, repair_dets,
                                          opt.sigma_c, opt.dedup_iou);
        image_out.insert(image_out.end(), merged.begin(), merged.end());
      }
      fused.per_image[id] = std::move(image_out);
    }
  } else {
    throw InvalidArgument("unknown --op: " + opt.op +
                          " (expected nms, softnms, wbf, or union)");
  }
  ctx.timings_ms["fuse"] = fuse_sw.ms();

  fs::create_directories(ctx.out_dir);
  save_predictions(ctx.out_path("fused_predictions.json").string(), fused);
  ctx.outputs.push_back("fused_predictions.json");
  ctx.write_json("fuse_summary.json",
                 json{{"op", opt.op},
                      {"n_images", fused.per_image.size()},
                      {"config", ctx.config}});
  return 0;
}

// ---------------------------------------------------------------------------
// edccf (the full pipeline)

struct PipelineOptions {
  std::string global_path, gt_path, manifest_path;
  std::vector<std::string> repairs;  // class=path
  std::string box_format = "xywh";
  bool strict = false;
  double sigma_op = 0.25, iou_tp = 0.50, iou_pa = 0.10;
  double tau_hard = 0.30, sigma_c = 0.10, w_c = 0.15;
  double dedup_iou = 0.55, wbf_iou_cluster = 0.55;
  double activation_hcec_gate = 0.5;
  bool no_activation_gate = false;
  double preservation_tol = 0.0;
};

int run_pipeline(RunContext& ctx, const PipelineOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto& vocab = ClassVocabulary::road_distress();
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  auto global_branch =
      load_predictions_tracked(ctx, opt.global_path, manifest, fmt);
  global_branch.branch_id = "global";
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);

  std::map<std::string, BranchPredictions> repair_branches;
  std::vector<BranchPredictions> all_branches{global_branch};
  for (const auto& spec : opt.repairs) {
    const auto [code, path] = split_key_value(spec, "--repair");
    if (!vocab.contains(code)) throw MissingClass("unknown class code: " + code);
    auto branch = load_predictions_tracked(ctx, path, manifest, fmt);
    branch.branch_id = "repair-" + code;
    if (repair_branches.count(code))
      throw InvalidArgument("duplicate --repair for class " + code);
    all_branches.push_back(branch);
    repair_branches.emplace(code, std::move(branch));
  }
  ctx.timings_ms["load"] = load_sw.ms();

  // Diagnosis: error buckets on the global branch, roles from the branch
  // audit, then the per-class routing policy.
  Stopwatch diagnose_sw;
  DecompositionThresholds thresholds;
  thresholds.sigma_op = opt.sigma_op;
  thresholds.iou_tp = opt.iou_tp;
  thresholds.iou_pa = opt.iou_pa;
  const auto buckets = decompose_errors(global_branch, gt, vocab, thresholds);
  const auto audit = audit_branches(all_branches, gt, vocab);
  RoleConfig role_config;
  role_config.tau_hard = opt.tau_hard;
  const auto profiles = classify_roles(audit, buckets, role_config);

  PolicyConfig policy_config;
  policy_config.tau_hard = opt.tau_hard;
  policy_config.sigma_c = opt.sigma_c;
  policy_config.w_c = opt.w_c;
  policy_config.dedup_iou = opt.dedup_iou;
  policy_config.wbf_iou_cluster = opt.wbf_iou_cluster;
  policy_config.activation_hcec_gate = opt.activation_hcec_gate;
  policy_config.require_activation_gate = !opt.no_activation_gate;
  const FusionPolicy policy = derive_policy(profiles, buckets, policy_config);
  ctx.timings_ms["diagnose"] = diagnose_sw.ms();

  Stopwatch fuse_sw;
  const FusedOutput fused =
      apply_policy(policy, global_branch, repair_branches, vocab, policy_config);
  ctx.timings_ms["fuse"] = fuse_sw.ms();

  Stopwatch eval_sw;
  const EvalResult before = evaluate(global_branch, gt, vocab);
  const EvalResult after = evaluate(fused.detections, gt, vocab);
  std::set<std::string> hard_classes;
  for (const auto& [code, p] : profiles)
    if (p.role == ClassVocabulary::Role::Hard) hard_classes.insert(code);
  const PreservationReport preservation =
      verify_preservation(before, after, hard_classes, opt.preservation_tol);
  ctx.timings_ms["evaluate"] = eval_sw.ms();

  fs::create_directories(ctx.out_dir);
  save_predictions(ctx.out_path("fused_predictions.json").string(),
                   fused.detections);
  ctx.outputs.push_back("fused_predictions.json");

  json profile_doc = json::object();
  for (const auto& [code, p] : profiles) profile_doc[code] = to_json(p);
  json bucket_doc = json::object();
  for (const auto& [code, b] : buckets) bucket_doc[code] = to_json(b);
  ctx.write_json("edccf_report.json",
                 json{{"audit", to_json(audit)},
                      {"buckets", bucket_doc},
                      {"profiles", profile_doc},
                      {"policy", to_json(policy)},
                      {"source_attribution", fused.source_attribution},
                      {"eval_before", to_json(before)},
                      {"eval_after", to_json(after)},
                      {"hard_classes", hard_classes},
                      {"preservation", to_json(preservation)},
                      {"config", ctx.config}});

  if (opt.strict && !preservation.satisfied()) {
    std::fprintf(stderr,
                 "protocol violation: preservation contract failed "
                 "(%zu stable regressions, %zu hard classes not improved)\n",
                 preservation.stable_regressions.size(),
                 preservation.hard_not_improved.size());
    return 4;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate crc / rcv

struct CrcOptions {
  std::string pred_path, gt_path, manifest_path, class_code;
  std::string box_format = "xywh";
  double split = 0.5, iou_tp = 0.50;
  std::uint64_t seed = 0;
};

int run_crc(RunContext& ctx, const CrcOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  const auto preds = load_predictions_tracked(ctx, opt.pred_path, manifest, fmt);
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);
  ctx.timings_ms["load"] = load_sw.ms();

  Stopwatch fit_sw;
  const auto labeled =
      label_class_detections(preds, gt, opt.class_code, opt.iou_tp);
  const CalibrationFit fit =
      fit_crc(labeled, opt.class_code, opt.split, opt.seed);
  const BranchPredictions recalibrated =
      apply_crc(preds, opt.class_code, fit.a, fit.b);
  ctx.timings_ms["fit"] = fit_sw.ms();

  fs::create_directories(ctx.out_dir);
  save_predictions(ctx.out_path("recalibrated_predictions.json").string(),
                   recalibrated);
  ctx.outputs.push_back("recalibrated_predictions.json");

  json doc = to_json(fit);
  doc["config"] = ctx.config;
  ctx.write_json("crc_fit.json", doc);
  ctx.write_text("crc_fit.csv",
                 "class,a,b,fit_loss,holdout_ap_delta,converged,iterations\n" +
                     fit.class_code + "," + fmt17(fit.a) + "," + fmt17(fit.b) +
                     "," + fmt17(fit.fit_loss) + "," +
                     fmt17(fit.holdout_ap_delta) + "," +
                     (fit.converged ? "true" : "false") + "," +
                     std::to_string(fit.iterations) + "\n");
  return 0;
}

struct RcvOptions {
  std::string global_path, candidate_path, gt_path, manifest_path, class_code;
  std::string box_format = "xywh";
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  double iou_cluster = 0.55, score_floor = 1e-3;
};

int run_rcv(RunContext& ctx, const RcvOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto& vocab = ClassVocabulary::road_distress();
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  auto global_branch =
      load_predictions_tracked(ctx, opt.global_path, manifest, fmt);
  global_branch.branch_id = "global";
  auto candidate =
      load_predictions_tracked(ctx, opt.candidate_path, manifest, fmt);
  candidate.branch_id = "candidate";
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);
  ctx.timings_ms["load"] = load_sw.ms();

  Stopwatch sweep_sw;
  RcvConfig config;
  config.iou_cluster = opt.iou_cluster;
  config.score_floor = opt.score_floor;
  const RouteSweep sweep = rcv_sweep(global_branch, candidate, gt, vocab,
                                     opt.class_code, opt.alphas, config);
  ctx.timings_ms["sweep"] = sweep_sw.ms();

  std::string csv = "alpha,hard_ap50,map50,map5095\n";
  json per_alpha = json::object();
  for (const double alpha : sweep.alphas) {
    const EvalResult& e = sweep.per_alpha.at(alpha);
    const auto it = e.per_class_ap50.find(opt.class_code);
    const double hard_ap = it == e.per_class_ap50.end() ? 0.0 : it->second;
    csv += fmt17(alpha) + "," + fmt17(hard_ap) + "," + fmt17(e.map50) + "," +
           fmt17(e.map5095) + "\n";
    per_alpha[fmt17(alpha)] = to_json(e);
  }
  ctx.write_text("rcv_sweep.csv", csv);
  ctx.write_json("rcv_sweep.json",
                 json{{"hard_class", sweep.hard_class},
                      {"alphas", sweep.alphas},
                      {"per_alpha", per_alpha},
                      {"best_alpha", sweep.best_alpha},
                      {"best_matches_baseline", sweep.best_matches_baseline},
                      {"hard_ap_gain_over_baseline",
                       sweep.hard_ap_gain_over_baseline},
                      {"config", ctx.config}});
  return 0;
}

// ---------------------------------------------------------------------------
// stats (paired subset trials; `stats folds` for the fold view)

struct StatsOptions {
  std::string baseline_path, candidate_path, gt_path, manifest_path;
  std::string box_format = "xywh";
  int trials = 50, subset = 450, k_comparisons = 15, resamples = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::vector<std::string> class_ap;
};

int run_stats(RunContext& ctx, const StatsOptions& opt) {
  if (opt.baseline_path.empty() || opt.candidate_path.empty() ||
      opt.gt_path.empty() || opt.manifest_path.empty()) {
    std::fprintf(stderr,
                 "usage error: stats needs --baseline, --candidate, --gt, "
                 "and --manifest\n");
    return 2;
  }
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto& vocab = ClassVocabulary::road_distress();
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  const auto baseline =
      load_predictions_tracked(ctx, opt.baseline_path, manifest, fmt);
  const auto candidate =
      load_predictions_tracked(ctx, opt.candidate_path, manifest, fmt);
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);
  ctx.timings_ms["load"] = load_sw.ms();

  Stopwatch trials_sw;
  const PairedTrialTable table =
      subset_trials(baseline, candidate, gt, vocab, opt.trials, opt.subset,
                    opt.seed, opt.class_ap);
  const auto reports =
      report(table, opt.k_comparisons, opt.resamples, opt.seed, opt.level);
  ctx.timings_ms["trials"] = trials_sw.ms();

  ctx.write_text("trials.csv", to_csv(table));
  ctx.write_text("stats_report.csv", to_csv(reports));
  json doc = json::parse(to_json(reports));
  ctx.write_json("stats_report.json",
                 json{{"reports", doc}, {"config", ctx.config}});
  return 0;
}

struct FoldsOptions {
  std::string manifest_path;
  std::uint64_t seed = 0;
};

int run_folds(RunContext& ctx, const FoldsOptions& opt) {
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  Stopwatch sw;
  const auto folds = five_fold(manifest, opt.seed);
  ctx.timings_ms["folds"] = sw.ms();
  std::string csv = "fold,image_id\n";
  for (std::size_t i = 0; i < folds.size(); ++i)
    for (const auto& id : folds[i])
      csv += std::to_string(i) + "," + id + "\n";
  ctx.write_text("folds.csv", csv);
  return 0;
}

// ---------------------------------------------------------------------------
// synth scene / branch / scenario / dominance

struct SceneOptions {
  int images = 600;
  int min_boxes = 1, max_boxes = 2;
  std::uint64_t seed = 0;
  std::string dist_path;  // optional {code: probability} JSON
};

int run_scene(RunContext& ctx, const SceneOptions& opt) {
  std::map<std::string, double> dist = default_class_distribution();
  if (!opt.dist_path.empty()) {
    ctx.inputs.push_back(opt.dist_path);
    std::ifstream f(opt.dist_path, std::ios::binary);
    if (!f) throw ParseError("cannot read: " + opt.dist_path);
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw SchemaError(opt.dist_path + ": " + e.what());
    }
    if (!doc.is_object())
      throw SchemaError(opt.dist_path + ": expected {class-code: probability}");
    dist.clear();
    for (const auto& [code, p] : doc.items()) {
      if (!p.is_number())
        throw SchemaError(opt.dist_path + ": probability for " + code +
                          " must be a number");
      dist[code] = p.get<double>();
    }
  }

  Stopwatch sw;
  const GroundTruthSet gt = generate_scene(
      dist, opt.images, BoxCount{opt.min_boxes, opt.max_boxes}, opt.seed);
  ctx.timings_ms["generate"] = sw.ms();

  fs::create_directories(ctx.out_dir);
  save_ground_truth(ctx.out_path("gt.json").string(), gt);
  save_manifest(ctx.out_path("manifest.txt").string(), image_ids(gt));
  ctx.outputs.push_back("gt.json");
  ctx.outputs.push_back("manifest.txt");
  return 0;
}

struct BranchOptions {
  std::string gt_path, manifest_path, branch_id = "sim";
  std::string box_format = "xywh";
  double recall = 1.0, precision = 1.0, jitter = 0.0, noise = 0.1;
  double suppressed_frac = 0.0;
  bool scrambled_scores = false;
  std::vector<std::string> class_recall, class_precision;  // code=rate
  std::uint64_t seed = 0;
};

int run_branch(RunContext& ctx, const BranchOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  const auto gt = load_gt_tracked(ctx, opt.gt_path, manifest, fmt);
  ctx.timings_ms["load"] = load_sw.ms();

  BranchProfile profile;
  profile.branch_id = opt.branch_id;
  profile.default_recall = opt.recall;
  profile.default_precision = opt.precision;
  profile.jitter = opt.jitter;
  profile.score_noise = opt.noise;
  profile.suppressed_score_frac = opt.suppressed_frac;
  profile.order_preserving = !opt.scrambled_scores;
  for (const auto& spec : opt.class_recall) {
    const auto [code, rate] = split_key_value(spec, "--class-recall");
    profile.recall[code] = std::stod(rate);
  }
  for (const auto& spec : opt.class_precision) {
    const auto [code, rate] = split_key_value(spec, "--class-precision");
    profile.precision[code] = std::stod(rate);
  }

  Stopwatch sim_sw;
  const BranchPredictions preds =
      simulate_branch(gt, ClassVocabulary::road_distress(), profile, opt.seed);
  ctx.timings_ms["simulate"] = sim_sw.ms();

  fs::create_directories(ctx.out_dir);
  save_predictions(ctx.out_path("predictions.json").string(), preds);
  ctx.outputs.push_back("predictions.json");
  return 0;
}

struct ScenarioOptions {
  std::uint64_t seed = 4242;
  int images = 600, trials = 50, subset = 450;
  std::string hard_class = "cz";
};

int run_scenario(RunContext& ctx, const ScenarioOptions& opt) {
  Stopwatch sw;
  ScenarioConfig config;
  config.n_images = opt.images;
  config.n_trials = opt.trials;
  config.subset_size = opt.subset;
  config.hard_class = opt.hard_class;
  const ScenarioBundle bundle = hcrp_end_to_end(opt.seed, config);
  ctx.timings_ms["scenario"] = sw.ms();

  fs::create_directories(ctx.out_dir);
  save_ground_truth(ctx.out_path("gt.json").string(), bundle.gt);
  save_manifest(ctx.out_path("manifest.txt").string(), image_ids(bundle.gt));
  save_predictions(ctx.out_path("global.json").string(), bundle.global_branch);
  save_predictions(ctx.out_path("specialist.json").string(),
                   bundle.specialist_branch);
  save_predictions(ctx.out_path("fused.json").string(),
                   bundle.fused.detections);
  for (const char* name :
       {"gt.json", "manifest.txt", "global.json", "specialist.json",
        "fused.json"})
    ctx.outputs.push_back(name);

  json profile_doc = json::object();
  for (const auto& [code, p] : bundle.profiles) profile_doc[code] = to_json(p);
  json bucket_doc = json::object();
  for (const auto& [code, b] : bundle.buckets) bucket_doc[code] = to_json(b);
  ctx.write_json("scenario_report.json",
                 json{{"audit", to_json(bundle.audit)},
                      {"buckets", bucket_doc},
                      {"profiles", profile_doc},
                      {"policy", to_json(bundle.policy)},
                      {"eval_before", to_json(bundle.eval_before)},
                      {"eval_after", to_json(bundle.eval_after)},
                      {"hard_classes", bundle.hard_classes},
                      {"preservation", to_json(bundle.preservation)},
                      {"config", ctx.config}});
  if (opt.trials > 0) {
    ctx.write_text("trials.csv", to_csv(bundle.trials));
    ctx.write_text("stats_report.csv", to_csv(bundle.reports));
    json doc = json::parse(to_json(bundle.reports));
    ctx.write_json("stats_report.json",
                   json{{"reports", doc}, {"config", ctx.config}});
  }
  return 0;
}

struct DominanceOptions {
  int seeds = 200;
  std::uint64_t base_seed = 5000;
  double iou_cluster = 0.30;
};

int run_dominance(RunContext& ctx, const DominanceOptions& opt) {
  Stopwatch sw;
  const auto& vocab = ClassVocabulary::road_distress();
  std::string csv =
      "seed,ap_uniform,ap_class_weighted,delta,precision_variance,"
      "added_recall,strict_gain,order_preserved\n";
  std::vector<double> deltas;

  for (int s = 0; s < opt.seeds; ++s) {
    // Dense single-class scenes; the low-precision branch floods each image
    // with false positives so cross-branch phantom pairs form real clusters
    // (the regime where precision-weighted scores diverge from uniform).
    const GroundTruthSet gt =
        generate_scene({{"cz", 1.0}}, 14, BoxCount{8, 12},
                       opt.base_seed + static_cast<std::uint64_t>(s));
    BranchProfile hi;
    hi.branch_id = "hi";
    hi.default_recall = 0.9;
    hi.default_precision = 0.9;
    hi.jitter = 0.02;
    hi.score_noise = 0.1;
    BranchProfile lo = hi;
    lo.branch_id = "lo";
    lo.default_recall = 0.55;
    lo.default_precision = 0.3;
    lo.jitter = 0.05;

    const auto hi_preds = simulate_branch(
        gt, vocab, hi, 6000 + 3 * static_cast<std::uint64_t>(s));
    const auto lo_preds = simulate_branch(
        gt, vocab, lo, 6001 + 3 * static_cast<std::uint64_t>(s));
    const DominanceResult r = dominance_experiment(
        gt, {{hi_preds, hi}, {lo_preds, lo}}, "cz", vocab, opt.iou_cluster);

    deltas.push_back(r.ap_class_weighted - r.ap_uniform);
    csv += std::to_string(s) + "," + fmt17(r.ap_uniform) + "," +
           fmt17(r.ap_class_weighted) + "," +
           fmt17(r.ap_class_weighted - r.ap_uniform) + "," +
           fmt17(r.precision_variance) + "," +
           (r.added_recall ? "true" : "false") + "," +
           (r.strict_gain ? "true" : "false") + "," +
           (r.calibration_order_preserved ? "true" : "false") + "\n";
  }
  ctx.timings_ms["suite"] = sw.ms();

  double mean = 0;
  for (const double d : deltas) mean += d;
  mean /= deltas.empty() ? 1.0 : static_cast<double>(deltas.size());
  const WilcoxonResult w = wilcoxon_one_sided(deltas);

  ctx.write_text("dominance.csv", csv);
  ctx.write_json("dominance_summary.json",
                 json{{"n_seeds", opt.seeds},
                      {"mean_delta", mean},
                      {"wilcoxon_statistic", w.statistic},
                      {"wilcoxon_p_one_sided", w.p_raw},
                      {"n_used", w.n_used},
                      {"config", ctx.config}});
  return 0;
}

// ---------------------------------------------------------------------------
// report (plot-data emitter: CSV series + an SVG bar chart with CI whiskers)

struct ReportOptions {
  std::string input_path;
};

int run_report(RunContext& ctx, const ReportOptions& opt) {
  ctx.inputs.push_back(opt.input_path);
  std::ifstream f(opt.input_path, std::ios::binary);
  if (!f) throw ParseError("cannot read: " + opt.input_path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw SchemaError(opt.input_path + ": " + e.what());
  }
  const json& reports = doc.contains("reports") ? doc.at("reports") : doc;
  if (!reports.is_object() || reports.empty())
    throw SchemaError(opt.input_path +
                      ": expected a {metric: report} object (stats output)");

  struct Series {
    std::string metric;
    double mean = 0, lo = 0, hi = 0, win = 0, p_adj = 1;
    int n = 0;
  };
  std::vector<Series> series;
  for (const auto& [metric, r] : reports.items()) {
    if (!r.is_object() || !r.contains("mean_delta"))
      throw SchemaError(opt.input_path + ": entry " + metric +
                        " is not a report");
    Series s;
    s.metric = metric;
    s.mean = r.at("mean_delta").get<double>();
    if (r.contains("ci") && r.at("ci").is_array() && r.at("ci").size() == 2) {
      s.lo = r.at("ci")[0].get<double>();
      s.hi = r.at("ci")[1].get<double>();
    }
    s.win = r.value("win_rate", 0.0);
    s.p_adj = r.value("p_adjusted", 1.0);
    s.n = r.value("n_trials", 0);
    series.push_back(std::move(s));
  }

  Stopwatch sw;
  std::string csv = "metric,mean_delta,ci_lo,ci_hi,win_rate,p_adjusted,n_trials\n";
  for (const auto& s : series)
    csv += s.metric + "," + fmt17(s.mean) + "," + fmt17(s.lo) + "," +
           fmt17(s.hi) + "," + fmt17(s.win) + "," + fmt17(s.p_adj) + "," +
           std::to_string(s.n) + "\n";
  ctx.write_text("report_figure.csv", csv);

  // Plot-data SVG: one bar per metric (mean delta) with CI whiskers. Fixed
  // canvas, value-scaled, fully deterministic text output.
  const double width = 640, height = 360, margin = 56;
  double vmax = 0;
  for (const auto& s : series)
    vmax = std::max({vmax, std::fabs(s.mean), std::fabs(s.lo), std::fabs(s.hi)});
  if (vmax <= 0) vmax = 1;
  const double plot_h = height - 2 * margin;
  const double zero_y = height / 2;
  const double scale = (plot_h / 2) / vmax;
  const double slot = (width - 2 * margin) / static_cast<double>(series.size());

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
      fmt17(width) + " " + fmt17(height) + "\">\n" +
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
      "<line x1=\"" + fmt17(margin) + "\" y1=\"" + fmt17(zero_y) +
      "\" x2=\"" + fmt17(width - margin) + "\" y2=\"" + fmt17(zero_y) +
      "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const double cx = margin + slot * (static_cast<double>(i) + 0.5);
    const double bar_w = slot * 0.4;
    const double y_val = zero_y - s.mean * scale;
    const double bar_top = std::min(zero_y, y_val);
    const double bar_h = std::fabs(s.mean) * scale;
    svg += "<rect x=\"" + fmt17(cx - bar_w / 2) + "\" y=\"" + fmt17(bar_top) +
           "\" width=\"" + fmt17(bar_w) + "\" height=\"" + fmt17(bar_h) +
           "\" fill=\"#4878a8\"/>\n";
    const double y_lo = zero_y - s.lo * scale;
    const double y_hi = zero_y - s.hi * scale;
    svg += "<line x1=\"" + fmt17(cx) + "\" y1=\"" + fmt17(y_lo) + "\" x2=\"" +
           fmt17(cx) + "\" y2=\"" + fmt17(y_hi) +
           "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    for (const double y : {y_lo, y_hi})
      svg += "<line x1=\"" + fmt17(cx - bar_w / 4) + "\" y1=\"" + fmt17(y) +
             "\" x2=\"" + fmt17(cx + bar_w / 4) + "\" y2=\"" + fmt17(y) +
             "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt17(cx) + "\" y=\"" + fmt17(height - margin / 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">" +
           s.metric + "</text>\n";
  }
  svg += "</svg>\n";
  ctx.write_text("report_figure.svg", svg);
  ctx.timings_ms["emit"] = sw.ms();
  return 0;
}

// ---------------------------------------------------------------------------
// bench (post-processing latency: identity routing vs uniform WBF)

struct BenchOptions {
  std::vector<std::string> pred_paths;
  std::string manifest_path;
  std::string box_format = "xywh";
  int images = 100, repeats = 5;
  double iou_cluster = 0.55;
};

int run_bench(RunContext& ctx, const BenchOptions& opt) {
  Stopwatch load_sw;
  const BoxFormat fmt = parse_box_format(opt.box_format);
  const auto& vocab = ClassVocabulary::road_distress();
  const auto manifest = load_manifest_tracked(ctx, opt.manifest_path);
  if (opt.images < 1 ||
      static_cast<std::size_t>(opt.images) > manifest.size())
    throw InvalidArgument("--images must lie in [1, " +
                          std::to_string(manifest.size()) + "]");
  if (opt.repeats < 1) throw InvalidArgument("--repeats must be >= 1");
  const std::vector<std::string> subset(manifest.begin(),
                                        manifest.begin() + opt.images);
  std::vector<BranchPredictions> branches;
  for (const auto& path : opt.pred_paths)
    branches.push_back(load_predictions_tracked(ctx, path, manifest, fmt));
  ctx.timings_ms["load"] = load_sw.ms();

  // Pipelines run on pre-parsed data; file I/O never enters the timings.
  const auto keep_first = [&]() {
    std::size_t total = 0;
    for (const auto& id : subset) {
      const auto& dets = branches[0].per_image.at(id);
      std::vector<Detection> copy(dets.begin(), dets.end());
      total += copy.size();
    }
    return total;
  };
  FusionWeights weights;
  for (const auto& b : branches) weights.per_branch[b.branch_id] = 1.0;
  const auto wbf_all = [&]() {
    std::size_t total = 0;
    for (const auto& id : subset) {
      for (const auto& code : vocab.codes()) {
        std::vector<std::pair<std::string, std::vector<Detection>>> inputs;
        bool any = false;
        for (const auto& b : branches) {
          std::vector<Detection> dets;
          for (const auto& d : b.per_image.at(id))
            if (d.class_code == code) dets.push_back(d);
          any = any || !dets.empty();
          inputs.emplace_back(b.branch_id, std::move(dets));
        }
        if (!any) continue;
        total += wbf(inputs, weights, opt.iou_cluster).size();
      }
    }
    return total;
  };

  struct Pipeline {
    std::string name;
    std::function<std::size_t()> run;
  };
  std::vector<Pipeline> pipelines{{"keep_first", keep_first}};
  if (branches.size() >= 2) pipelines.push_back({"wbf_uniform", wbf_all});

  Stopwatch bench_sw;
  std::string csv = "pipeline,median_ms,relative_to_first\n";
  json rows = json::array();
  double first_median = 0;
  for (const auto& p : pipelines) {
    std::vector<double> times;
    std::size_t sink = 0;
    for (int r = 0; r < opt.repeats; ++r) {
      Stopwatch run_sw;
      sink += p.run();
      times.push_back(run_sw.ms());
    }
    std::sort(times.begin(), times.end());
    const double median = times.size() % 2 == 1
                              ? times[times.size() / 2]
                              : 0.5 * (times[times.size() / 2 - 1] +
                                       times[times.size() / 2]);
    if (p.name == pipelines.front().name) first_median = median;
    const double rel =
        first_median > 0 ? (median - first_median) / first_median : 0.0;
    csv += p.name + "," + fmt17(median) + "," + fmt17(rel) + "\n";
    rows.push_back(json{{"pipeline", p.name},
                        {"median_ms", median},
                        {"relative_to_first", rel},
                        {"n_outputs", sink / opt.repeats}});
  }
  ctx.timings_ms["bench"] = bench_sw.ms();

  ctx.write_text("bench.csv", csv);
  ctx.write_json("bench.json", json{{"images", opt.images},
                                    {"repeats", opt.repeats},
                                    {"pipelines", rows},
                                    {"config", ctx.config}});
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"edccf: error-decomposed, class-conditional detection fusion"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI/TOML key=value file mirroring the options below "
                 "([subcommand] sections); explicit flags win");
  app.set_version_flag("--version", std::string(kVersion));

  std::string out_dir = ".";
  app.add_option("--out", out_dir, "Output directory (created if absent)")
      ->capture_default_str();

  // --- audit
  AuditOptions audit_opt;
  CLI::App* audit = app.add_subcommand(
      "audit", "Schema/manifest integrity checks and split-overlap scan");
  audit->add_option("--pred", audit_opt.pred_path,
                    "Prediction file to check against --manifest");
  audit->add_option("--manifest", audit_opt.manifest_path,
                    "Image-id manifest (one id per line)");
  audit->add_option("--train-manifest", audit_opt.train_manifest,
                    "Train split manifest for the overlap scan");
  audit->add_option("--val-manifest", audit_opt.val_manifest,
                    "Validation split manifest for the overlap scan");
  audit->add_option("--hashes", audit_opt.hashes_path,
                    "JSON {image-id: content-hash} for the overlap scan");
  audit->add_option("--hash-dir", audit_opt.hash_dir,
                    "Directory of per-id files to hash (SHA-256) instead of --hashes");

  // --- evaluate
  EvaluateOptions eval_opt;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Average precision at IoU 0.50 and 0.50:0.05:0.95");
  eval_cmd->add_option("--pred", eval_opt.pred_path, "Prediction file")
      ->required();
  eval_cmd->add_option("--gt", eval_opt.gt_path, "Ground-truth file")
      ->required();
  eval_cmd->add_option("--manifest", eval_opt.manifest_path, "Image-id manifest")
      ->required();
  eval_cmd->add_option("--box-format", eval_opt.box_format, "xywh or xyxy")
      ->capture_default_str();

  // --- decompose
  DecomposeOptions dec_opt;
  CLI::App* dec = app.add_subcommand(
      "decompose", "Per-class error buckets, concentration, and swap cost");
  dec->add_option("--pred", dec_opt.pred_path, "Prediction file to diagnose")
      ->required();
  dec->add_option("--gt", dec_opt.gt_path, "Ground-truth file")->required();
  dec->add_option("--manifest", dec_opt.manifest_path, "Image-id manifest")
      ->required();
  dec->add_option("--branch", dec_opt.extra_branches,
                  "Extra branch as id=file (repeatable); enables nonzero "
                  "swap-cost estimates");
  dec->add_option("--box-format", dec_opt.box_format, "xywh or xyxy")
      ->capture_default_str();
  dec->add_option("--sigma-op", dec_opt.sigma_op, "Operating score threshold")
      ->capture_default_str();
  dec->add_option("--iou-tp", dec_opt.iou_tp, "True-positive IoU")
      ->capture_default_str();
  dec->add_option("--iou-pa", dec_opt.iou_pa, "Absence floor IoU")
      ->capture_default_str();
  dec->add_option("--tau-hard", dec_opt.tau_hard,
                  "Hard-class AP50 threshold")
      ->capture_default_str();

  // --- fuse
  FuseOptions fuse_opt;
  CLI::App* fuse_cmd = app.add_subcommand(
      "fuse", "Apply one fusion operator uniformly and write a prediction file");
  fuse_cmd->add_option("--op", fuse_opt.op, "nms, softnms, wbf, or union")
      ->required();
  fuse_cmd->add_option("--pred", fuse_opt.pred_paths,
                       "Prediction file (repeatable; order matters)")
      ->required();
  fuse_cmd->add_option("--manifest", fuse_opt.manifest_path, "Image-id manifest")
      ->required();
  fuse_cmd->add_option("--box-format", fuse_opt.box_format, "xywh or xyxy")
      ->capture_default_str();
  fuse_cmd->add_option("--iou", fuse_opt.iou, "NMS suppression threshold")
      ->capture_default_str();
  fuse_cmd->add_option("--sigma", fuse_opt.sigma,
                       "Soft-NMS sigma (gaussian) or slope (linear)")
      ->capture_default_str();
  fuse_cmd->add_option("--mode", fuse_opt.mode, "Soft-NMS decay: linear|gaussian")
      ->capture_default_str();
  fuse_cmd->add_option("--score-floor", fuse_opt.score_floor,
                       "Drop detections below this score")
      ->capture_default_str();
  fuse_cmd->add_option("--iou-cluster", fuse_opt.iou_cluster,
                       "WBF cluster-join IoU")
      ->capture_default_str();
  fuse_cmd->add_option("--weights", fuse_opt.weights,
                       "WBF branch weights, one per --pred (default uniform)");
  fuse_cmd->add_option("--sigma-c", fuse_opt.sigma_c,
                       "Union: low-score floor for repair detections")
      ->capture_default_str();
  fuse_cmd->add_option("--dedup-iou", fuse_opt.dedup_iou,
                       "Union: duplicate-suppression IoU")
      ->capture_default_str();

  // --- edccf
  PipelineOptions pipe_opt;
  CLI::App* pipe = app.add_subcommand(
      "edccf",
      "Full pipeline: decompose, derive the routing policy, fuse, verify");
  pipe->add_option("--global", pipe_opt.global_path, "Global branch predictions")
      ->required();
  pipe->add_option("--repair", pipe_opt.repairs,
                   "Repair branch as class=file (repeatable)");
  pipe->add_option("--gt", pipe_opt.gt_path, "Ground-truth file")->required();
  pipe->add_option("--manifest", pipe_opt.manifest_path, "Image-id manifest")
      ->required();
  pipe->add_option("--box-format", pipe_opt.box_format, "xywh or xyxy")
      ->capture_default_str();
  pipe->add_flag("--strict", pipe_opt.strict,
                 "Exit 4 when the preservation contract fails");
  pipe->add_option("--sigma-op", pipe_opt.sigma_op, "Operating score threshold")
      ->capture_default_str();
  pipe->add_option("--iou-tp", pipe_opt.iou_tp, "True-positive IoU")
      ->capture_default_str();
  pipe->add_option("--iou-pa", pipe_opt.iou_pa, "Absence floor IoU")
      ->capture_default_str();
  pipe->add_option("--tau-hard", pipe_opt.tau_hard, "Hard-class AP50 threshold")
      ->capture_default_str();
  pipe->add_option("--sigma-c", pipe_opt.sigma_c, "Union arm low-score floor")
      ->capture_default_str();
  pipe->add_option("--w-c", pipe_opt.w_c, "Low-weight WBF repair weight")
      ->capture_default_str();
  pipe->add_option("--dedup-iou", pipe_opt.dedup_iou, "Union dedup IoU")
      ->capture_default_str();
  pipe->add_option("--wbf-iou-cluster", pipe_opt.wbf_iou_cluster,
                   "WBF arm cluster-join IoU")
      ->capture_default_str();
  pipe->add_option("--activation-hcec-gate", pipe_opt.activation_hcec_gate,
                   "Minimum recoverable-error concentration to route a hard "
                   "class with zero swap cost")
      ->capture_default_str();
  pipe->add_flag("--no-activation-gate", pipe_opt.no_activation_gate,
                 "Route every hard class regardless of the activation gate");
  pipe->add_option("--preservation-tol", pipe_opt.preservation_tol,
                   "Allowed stable-class AP50 drop")
      ->capture_default_str();

  // --- calibrate
  CLI::App* cal = app.add_subcommand("calibrate",
                                     "Score recalibration and route sweeps");
  cal->require_subcommand(1);
  CrcOptions crc_opt;
  CLI::App* crc = cal->add_subcommand(
      "crc", "Fit and apply the per-class logistic score recalibration");
  crc->add_option("--pred", crc_opt.pred_path, "Prediction file")->required();
  crc->add_option("--gt", crc_opt.gt_path, "Ground-truth file")->required();
  crc->add_option("--manifest", crc_opt.manifest_path, "Image-id manifest")
      ->required();
  crc->add_option("--class", crc_opt.class_code, "Class code to recalibrate")
      ->required();
  crc->add_option("--split", crc_opt.split, "Fit-split fraction")
      ->capture_default_str();
  crc->add_option("--iou-tp", crc_opt.iou_tp, "TP labeling IoU")
      ->capture_default_str();
  crc->add_option("--seed", crc_opt.seed, "Split seed")->capture_default_str();
  crc->add_option("--box-format", crc_opt.box_format, "xywh or xyxy")
      ->capture_default_str();

  RcvOptions rcv_opt;
  CLI::App* rcv = cal->add_subcommand(
      "rcv", "Route-contribution sweep for one hard class");
  rcv->add_option("--global", rcv_opt.global_path, "Global branch predictions")
      ->required();
  rcv->add_option("--candidate", rcv_opt.candidate_path,
                  "Candidate branch predictions")
      ->required();
  rcv->add_option("--gt", rcv_opt.gt_path, "Ground-truth file")->required();
  rcv->add_option("--manifest", rcv_opt.manifest_path, "Image-id manifest")
      ->required();
  rcv->add_option("--class", rcv_opt.class_code, "Hard class to sweep")
      ->required();
  rcv->add_option("--alphas", rcv_opt.alphas,
                  "Blend weights to sweep (repeatable)")
      ->capture_default_str();
  rcv->add_option("--iou-cluster", rcv_opt.iou_cluster, "WBF cluster-join IoU")
      ->capture_default_str();
  rcv->add_option("--score-floor", rcv_opt.score_floor, "WBF score floor")
      ->capture_default_str();
  rcv->add_option("--box-format", rcv_opt.box_format, "xywh or xyxy")
      ->capture_default_str();

  // --- stats
  StatsOptions stats_opt;
  CLI::App* stats_cmd = app.add_subcommand(
      "stats", "Paired subset trials with signed-rank tests and bootstrap CIs");
  stats_cmd->add_option("--baseline", stats_opt.baseline_path,
                        "Baseline prediction file");
  stats_cmd->add_option("--candidate", stats_opt.candidate_path,
                        "Candidate prediction file");
  stats_cmd->add_option("--gt", stats_opt.gt_path, "Ground-truth file");
  stats_cmd->add_option("--manifest", stats_opt.manifest_path,
                        "Image-id manifest");
  stats_cmd->add_option("--trials", stats_opt.trials, "Number of paired trials")
      ->capture_default_str();
  stats_cmd->add_option("--subset", stats_opt.subset, "Images per trial")
      ->capture_default_str();
  stats_cmd->add_option("--seed", stats_opt.seed, "Base seed")
      ->capture_default_str();
  stats_cmd->add_option("--class-ap", stats_opt.class_ap,
                        "Track ap50:<code> as an extra metric (repeatable)");
  stats_cmd->add_option("--k", stats_opt.k_comparisons,
                        "Bonferroni family size")
      ->capture_default_str();
  stats_cmd->add_option("--resamples", stats_opt.resamples,
                        "Bootstrap resamples")
      ->capture_default_str();
  stats_cmd->add_option("--level", stats_opt.level, "CI level")
      ->capture_default_str();
  stats_cmd->add_option("--box-format", stats_opt.box_format, "xywh or xyxy")
      ->capture_default_str();
  FoldsOptions folds_opt;
  CLI::App* folds = stats_cmd->add_subcommand(
      "folds", "Deterministic five-fold split of a manifest");
  folds->add_option("--manifest", folds_opt.manifest_path, "Image-id manifest")
      ->required();
  folds->add_option("--seed", folds_opt.seed, "Shuffle seed")
      ->capture_default_str();

  // --- synth
  CLI::App* synth = app.add_subcommand(
      "synth", "Seeded synthetic scenes, branches, and reference scenarios");
  synth->require_subcommand(1);
  SceneOptions scene_opt;
  CLI::App* scene = synth->add_subcommand(
      "scene", "Generate ground truth from a class distribution");
  scene->add_option("--images", scene_opt.images, "Number of images")
      ->capture_default_str();
  scene->add_option("--min-boxes", scene_opt.min_boxes, "Min truths per image")
      ->capture_default_str();
  scene->add_option("--max-boxes", scene_opt.max_boxes, "Max truths per image")
      ->capture_default_str();
  scene->add_option("--seed", scene_opt.seed, "Scene seed")
      ->capture_default_str();
  scene->add_option("--dist", scene_opt.dist_path,
                    "JSON {class-code: probability}; defaults to the bundled "
                    "long-tail road-distress mix");

  BranchOptions branch_opt;
  CLI::App* branch = synth->add_subcommand(
      "branch", "Simulate a detector branch over an existing scene");
  branch->add_option("--gt", branch_opt.gt_path, "Ground-truth file")
      ->required();
  branch->add_option("--manifest", branch_opt.manifest_path, "Image-id manifest")
      ->required();
  branch->add_option("--branch-id", branch_opt.branch_id, "Branch identifier")
      ->capture_default_str();
  branch->add_option("--recall", branch_opt.recall, "Default per-truth recall")
      ->capture_default_str();
  branch->add_option("--precision", branch_opt.precision,
                     "Default precision (drives false-positive volume)")
      ->capture_default_str();
  branch->add_option("--class-recall", branch_opt.class_recall,
                     "Per-class recall as code=rate (repeatable)");
  branch->add_option("--class-precision", branch_opt.class_precision,
                     "Per-class precision as code=rate (repeatable)");
  branch->add_option("--jitter", branch_opt.jitter,
                     "Box noise as a fraction of box size")
      ->capture_default_str();
  branch->add_option("--noise", branch_opt.noise, "Score noise (std dev)")
      ->capture_default_str();
  branch->add_option("--suppressed-frac", branch_opt.suppressed_frac,
                     "Fraction of hits redrawn under the operating point")
      ->capture_default_str();
  branch->add_flag("--scrambled-scores", branch_opt.scrambled_scores,
                   "Break the precision-ordered score law");
  branch->add_option("--seed", branch_opt.seed, "Simulation seed")
      ->capture_default_str();
  branch->add_option("--box-format", branch_opt.box_format, "xywh or xyxy")
      ->capture_default_str();

  ScenarioOptions scenario_opt;
  CLI::App* scenario = synth->add_subcommand(
      "scenario", "Full two-branch reference scenario with pipeline artifacts");
  scenario->add_option("--seed", scenario_opt.seed, "Scenario seed")
      ->capture_default_str();
  scenario->add_option("--images", scenario_opt.images, "Number of images")
      ->capture_default_str();
  scenario->add_option("--trials", scenario_opt.trials,
                       "Paired trials (0 skips the stats stage)")
      ->capture_default_str();
  scenario->add_option("--subset", scenario_opt.subset, "Images per trial")
      ->capture_default_str();
  scenario->add_option("--hard-class", scenario_opt.hard_class,
                       "Class the scenario degrades and repairs")
      ->capture_default_str();

  DominanceOptions dom_opt;
  CLI::App* dom = synth->add_subcommand(
      "dominance", "Precision-weighted vs uniform fusion over seeded scenarios");
  dom->add_option("--seeds", dom_opt.seeds, "Number of scenarios")
      ->capture_default_str();
  dom->add_option("--base-seed", dom_opt.base_seed, "First scene seed")
      ->capture_default_str();
  dom->add_option("--iou-cluster", dom_opt.iou_cluster, "WBF cluster-join IoU")
      ->capture_default_str();

  // --- report
  ReportOptions report_opt;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Figure-data series (CSV + SVG) from a stats report");
  report_cmd->add_option("--input", report_opt.input_path,
                         "stats_report.json produced by `stats`")
      ->required();

  // --- bench
  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand(
      "bench", "Median post-processing latency per fusion pipeline");
  bench->add_option("--pred", bench_opt.pred_paths,
                    "Prediction file (repeatable)")
      ->required();
  bench->add_option("--manifest", bench_opt.manifest_path, "Image-id manifest")
      ->required();
  bench->add_option("--images", bench_opt.images, "Images to process")
      ->capture_default_str();
  bench->add_option("--repeats", bench_opt.repeats, "Timed repetitions")
      ->capture_default_str();
  bench->add_option("--iou-cluster", bench_opt.iou_cluster,
                    "WBF cluster-join IoU")
      ->capture_default_str();
  bench->add_option("--box-format", bench_opt.box_format, "xywh or xyxy")
      ->capture_default_str();

  // Let --out (and --config) appear after a subcommand's own flags.
  const std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands({})) {
      sub->fallthrough(true);
      enable_fallthrough(sub);
    }
  };
  enable_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunContext ctx;
  ctx.out_dir = out_dir;

  try {
    int rc = 0;
    if (audit->parsed()) {
      ctx.command = "audit";
      ctx.config = json{{"pred", audit_opt.pred_path},
                        {"manifest", audit_opt.manifest_path},
                        {"train_manifest", audit_opt.train_manifest},
                        {"val_manifest", audit_opt.val_manifest},
                        {"hashes", audit_opt.hashes_path},
                        {"hash_dir", audit_opt.hash_dir}};
      rc = run_audit(ctx, audit_opt);
    } else if (eval_cmd->parsed()) {
      ctx.command = "evaluate";
      ctx.config = json{{"pred", eval_opt.pred_path},
                        {"gt", eval_opt.gt_path},
                        {"manifest", eval_opt.manifest_path},
                        {"box_format", eval_opt.box_format}};
      rc = run_evaluate(ctx, eval_opt);
    } else if (dec->parsed()) {
      ctx.command = "decompose";
      ctx.config = json{{"pred", dec_opt.pred_path},
                        {"gt", dec_opt.gt_path},
                        {"manifest", dec_opt.manifest_path},
                        {"branches", dec_opt.extra_branches},
                        {"box_format", dec_opt.box_format},
                        {"sigma_op", dec_opt.sigma_op},
                        {"iou_tp", dec_opt.iou_tp},
                        {"iou_pa", dec_opt.iou_pa},
                        {"tau_hard", dec_opt.tau_hard}};
      rc = run_decompose(ctx, dec_opt);
    } else if (fuse_cmd->parsed()) {
      ctx.command = "fuse";
      ctx.config = json{{"op", fuse_opt.op},
                        {"preds", fuse_opt.pred_paths},
                        {"manifest", fuse_opt.manifest_path},
                        {"box_format", fuse_opt.box_format},
                        {"iou", fuse_opt.iou},
                        {"sigma", fuse_opt.sigma},
                        {"mode", fuse_opt.mode},
                        {"score_floor", fuse_opt.score_floor},
                        {"iou_cluster", fuse_opt.iou_cluster},
                        {"weights", fuse_opt.weights},
                        {"sigma_c", fuse_opt.sigma_c},
                        {"dedup_iou", fuse_opt.dedup_iou}};
      rc = run_fuse(ctx, fuse_opt);
    } else if (pipe->parsed()) {
      ctx.command = "edccf";
      ctx.config = json{{"global", pipe_opt.global_path},
                        {"repairs", pipe_opt.repairs},
                        {"gt", pipe_opt.gt_path},
                        {"manifest", pipe_opt.manifest_path},
                        {"box_format", pipe_opt.box_format},
                        {"strict", pipe_opt.strict},
                        {"sigma_op", pipe_opt.sigma_op},
                        {"iou_tp", pipe_opt.iou_tp},
                        {"iou_pa", pipe_opt.iou_pa},
                        {"tau_hard", pipe_opt.tau_hard},
                        {"sigma_c", pipe_opt.sigma_c},
                        {"w_c", pipe_opt.w_c},
                        {"dedup_iou", pipe_opt.dedup_iou},
                        {"wbf_iou_cluster", pipe_opt.wbf_iou_cluster},
                        {"activation_hcec_gate", pipe_opt.activation_hcec_gate},
                        {"no_activation_gate", pipe_opt.no_activation_gate},
                        {"preservation_tol", pipe_opt.preservation_tol}};
      rc = run_pipeline(ctx, pipe_opt);
    } else if (crc->parsed()) {
      ctx.command = "calibrate crc";
      ctx.config = json{{"pred", crc_opt.pred_path},
                        {"gt", crc_opt.gt_path},
                        {"manifest", crc_opt.manifest_path},
                        {"class", crc_opt.class_code},
                        {"split", crc_opt.split},
                        {"iou_tp", crc_opt.iou_tp},
                        {"seed", crc_opt.seed},
                        {"box_format", crc_opt.box_format}};
      rc = run_crc(ctx, crc_opt);
    } else if (rcv->parsed()) {
      ctx.command = "calibrate rcv";
      ctx.config = json{{"global", rcv_opt.global_path},
                        {"candidate", rcv_opt.candidate_path},
                        {"gt", rcv_opt.gt_path},
                        {"manifest", rcv_opt.manifest_path},
                        {"class", rcv_opt.class_code},
                        {"alphas", rcv_opt.alphas},
                        {"iou_cluster", rcv_opt.iou_cluster},
                        {"score_floor", rcv_opt.score_floor},
                        {"box_format", rcv_opt.box_format}};
      rc = run_rcv(ctx, rcv_opt);
    } else if (folds->parsed()) {
      ctx.command = "stats folds";
      ctx.config = json{{"manifest", folds_opt.manifest_path},
                        {"seed", folds_opt.seed}};
      rc = run_folds(ctx, folds_opt);
    } else if (stats_cmd->parsed()) {
      ctx.command = "stats";
      ctx.config = json{{"baseline", stats_opt.baseline_path},
                        {"candidate", stats_opt.candidate_path},
                        {"gt", stats_opt.gt_path},
                        {"manifest", stats_opt.manifest_path},
                        {"box_format", stats_opt.box_format},
                        {"trials", stats_opt.trials},
                        {"subset", stats_opt.subset},
                        {"seed", stats_opt.seed},
                        {"class_ap", stats_opt.class_ap},
                        {"k_comparisons", stats_opt.k_comparisons},
                        {"resamples", stats_opt.resamples},
                        {"level", stats_opt.level}};
      rc = run_stats(ctx, stats_opt);
    } else if (scene->parsed()) {
      ctx.command = "synth scene";
      ctx.config = json{{"images", scene_opt.images},
                        {"min_boxes", scene_opt.min_boxes},
                        {"max_boxes", scene_opt.max_boxes},
                        {"seed", scene_opt.seed},
                        {"dist", scene_opt.dist_path}};
      rc = run_scene(ctx, scene_opt);
    } else if (branch->parsed()) {
      ctx.command = "synth branch";
      ctx.config = json{{"gt", branch_opt.gt_path},
                        {"manifest", branch_opt.manifest_path},
                        {"branch_id", branch_opt.branch_id},
                        {"recall", branch_opt.recall},
                        {"precision", branch_opt.precision},
                        {"class_recall", branch_opt.class_recall},
                        {"class_precision", branch_opt.class_precision},
                        {"jitter", branch_opt.jitter},
                        {"noise", branch_opt.noise},
                        {"suppressed_frac", branch_opt.suppressed_frac},
                        {"scrambled_scores", branch_opt.scrambled_scores},
                        {"seed", branch_opt.seed},
                        {"box_format", branch_opt.box_format}};
      rc = run_branch(ctx, branch_opt);
    } else if (scenario->parsed()) {
      ctx.command = "synth scenario";
      ctx.config = json{{"seed", scenario_opt.seed},
                        {"images", scenario_opt.images},
                        {"trials", scenario_opt.trials},
                        {"subset", scenario_opt.subset},
                        {"hard_class", scenario_opt.hard_class}};
      rc = run_scenario(ctx, scenario_opt);
    } else if (dom->parsed()) {
      ctx.command = "synth dominance";
      ctx.config = json{{"seeds", dom_opt.seeds},
                        {"base_seed", dom_opt.base_seed},
                        {"iou_cluster", dom_opt.iou_cluster}};
      rc = run_dominance(ctx, dom_opt);
    } else if (report_cmd->parsed()) {
      ctx.command = "report";
      ctx.config = json{{"input", report_opt.input_path}};
      rc = run_report(ctx, report_opt);
    } else if (bench->parsed()) {
      ctx.command = "bench";
      ctx.config = json{{"preds", bench_opt.pred_paths},
                        {"manifest", bench_opt.manifest_path},
                        {"box_format", bench_opt.box_format},
                        {"images", bench_opt.images},
                        {"repeats", bench_opt.repeats},
                        {"iou_cluster", bench_opt.iou_cluster}};
      rc = run_bench(ctx, bench_opt);
    }
    if (rc != 2) ctx.write_manifest();
    return rc;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
