#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "edccf/calibration.hpp"
#include "edccf/error_decomposition.hpp"
#include "edccf/matching.hpp"
#include "edccf/policy.hpp"
#include "edccf/rng.hpp"
#include "edccf/synthetic.hpp"
#include "edccf/types.hpp"

using namespace edccf;

namespace {

const ClassVocabulary& vocab() { return ClassVocabulary::road_distress(); }

std::size_t total_boxes(const GroundTruthSet& gt) {
  std::size_t n = 0;
  for (const auto& [id, truths] : gt.per_image) n += truths.size();
  return n;
}

std::size_t count_class(const GroundTruthSet& gt, const std::string& code) {
  std::size_t n = 0;
  for (const auto& [id, truths] : gt.per_image)
    for (const auto& t : truths)
      if (t.class_code == code) ++n;
  return n;
}

// Rank correlation with average ranks, self-contained so the grid check does
// not lean on the code under test.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const auto ranks = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double below = 0, equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ++below;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = below + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("default class distribution is the exact long-tail mix") {
  const auto dist = default_class_distribution();
  const std::map<std::string, double> expected = {
      {"zxlf", 1631.0 / 5743.0}, {"hxlf", 1330.0 / 5743.0},
      {"lmlj", 1000.0 / 5743.0}, {"jl", 702.0 / 5743.0},
      {"kc", 492.0 / 5743.0},    {"cz", 285.0 / 5743.0},
      {"ssf", 256.0 / 5743.0},   {"hbgdf", 47.0 / 5743.0}};
  REQUIRE(dist.size() == 8);
  for (const auto& [code, frac] : expected) {
    REQUIRE(dist.count(code) == 1);
    CHECK(dist.at(code) == frac);  // exact count ratios, no rounding slack
  }
  double sum = 0;
  for (const auto& [code, frac] : dist) sum += frac;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("generate_scene is a pure function of its seed") {
  const auto dist = default_class_distribution();
  const GroundTruthSet a = generate_scene(dist, 30, BoxCount{1, 2}, 9001);
  const GroundTruthSet b = generate_scene(dist, 30, BoxCount{1, 2}, 9001);
  CHECK(a.per_image == b.per_image);

  const GroundTruthSet c = generate_scene(dist, 30, BoxCount{1, 2}, 9002);
  CHECK(a.per_image != c.per_image);
}

TEST_CASE("generated scenes respect ids, box counts, and geometry") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 40, BoxCount{2, 5}, 7);
  REQUIRE(gt.per_image.size() == 40);

  int i = 0;
  for (const auto& [id, truths] : gt.per_image) {
    char expect[16];
    std::snprintf(expect, sizeof expect, "img_%06d", i++);
    CHECK(id == expect);
    CHECK(truths.size() >= 2);
    CHECK(truths.size() <= 5);
    for (const auto& t : truths) {
      CHECK(vocab().contains(t.class_code));
      CHECK(t.box.w >= 0.05);
      CHECK(t.box.w <= 0.20);
      CHECK(t.box.h >= 0.05);
      CHECK(t.box.h <= 0.20);
      CHECK(t.box.x >= 0.0);
      CHECK(t.box.y >= 0.0);
      CHECK(t.box.x + t.box.w <= 1.0 + 1e-9);
      CHECK(t.box.y + t.box.h <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("single-class distribution yields only that class") {
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 25, BoxCount{1, 3}, 3);
  CHECK(total_boxes(gt) == count_class(gt, "cz"));
  CHECK(total_boxes(gt) >= 25);
}

TEST_CASE("empirical class fractions converge to the requested mix") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 4000, BoxCount{1, 2}, 99);
  const double n = static_cast<double>(total_boxes(gt));
  CHECK(std::abs(count_class(gt, "cz") / n - 285.0 / 5743.0) < 0.015);
  CHECK(std::abs(count_class(gt, "zxlf") / n - 1631.0 / 5743.0) < 0.02);
  CHECK(std::abs(count_class(gt, "hbgdf") / n - 47.0 / 5743.0) < 0.01);
}

TEST_CASE("scene generation validates its inputs") {
  const BoxCount ok{1, 2};
  CHECK_THROWS_AS(generate_scene({}, 10, ok, 0), InvalidDistribution);
  CHECK_THROWS_AS(generate_scene({{"cz", 0.9}}, 10, ok, 0), InvalidDistribution);
  CHECK_THROWS_AS(generate_scene({{"cz", -0.2}, {"zxlf", 1.2}}, 10, ok, 0),
                  InvalidDistribution);
  CHECK_THROWS_AS(
      generate_scene({{"cz", std::nan("")}}, 10, ok, 0), InvalidDistribution);
  CHECK_THROWS_AS(generate_scene({{"cz", 1.0}}, 0, ok, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_scene({{"cz", 1.0}}, 10, BoxCount{0, 2}, 0),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_scene({{"cz", 1.0}}, 10, BoxCount{3, 2}, 0),
                  InvalidArgument);
}

TEST_CASE("an ideal branch reproduces the truth with AP exactly 1") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 60, BoxCount{1, 2}, 11);
  BranchProfile ideal;  // defaults: recall 1, precision 1, jitter 0
  ideal.branch_id = "ideal";
  const BranchPredictions preds = simulate_branch(gt, vocab(), ideal, 12);

  CHECK(preds.branch_id == "ideal");
  REQUIRE(preds.per_image.size() == gt.per_image.size());
  for (const auto& [id, truths] : gt.per_image) {
    const auto& dets = preds.per_image.at(id);
    REQUIRE(dets.size() == truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
      CHECK(dets[i].class_code == truths[i].class_code);
      CHECK(dets[i].box == truths[i].box);  // jitter 0 keeps boxes verbatim
      CHECK(dets[i].score >= 0.001);
      CHECK(dets[i].score <= 0.999);
    }
  }

  const EvalResult ev = evaluate(preds, gt, vocab());
  CHECK(ev.map50 == 1.0);
  CHECK(ev.map5095 == 1.0);
  for (const auto& [code, ap] : ev.per_class_ap50) CHECK(ap == 1.0);
}

TEST_CASE("simulate_branch is deterministic for a fixed seed") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 40, BoxCount{1, 2}, 13);
  BranchProfile prof;
  prof.default_recall = 0.7;
  prof.default_precision = 0.6;
  prof.jitter = 0.02;
  const BranchPredictions a = simulate_branch(gt, vocab(), prof, 14);
  const BranchPredictions b = simulate_branch(gt, vocab(), prof, 14);
  CHECK(a.per_image == b.per_image);
  const BranchPredictions c = simulate_branch(gt, vocab(), prof, 15);
  CHECK(a.per_image != c.per_image);
}

TEST_CASE("zero recall yields empty predictions on every image") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 20, BoxCount{1, 2}, 17);
  BranchProfile blind;
  blind.default_recall = 0.0;  // default precision 1 -> no false positives either
  const BranchPredictions preds = simulate_branch(gt, vocab(), blind, 18);
  REQUIRE(preds.per_image.size() == gt.per_image.size());
  for (const auto& [id, dets] : preds.per_image) CHECK(dets.empty());
}

TEST_CASE("precision control converges at the operating scale") {
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 400, BoxCount{1, 2}, 21);
  BranchProfile prof;  // recall 1, jitter 0 -> every truth covered exactly
  prof.precision["cz"] = 0.5;
  const BranchPredictions preds = simulate_branch(gt, vocab(), prof, 22);

  const auto labeled = label_class_detections(preds, gt, "cz");
  REQUIRE(!labeled.empty());
  std::size_t tp = 0;
  double tp_score = 0, fp_score = 0;
  std::size_t fp = 0;
  for (const auto& l : labeled) {
    if (l.is_tp) {
      ++tp;
      tp_score += l.score;
    } else {
      ++fp;
      fp_score += l.score;
    }
  }
  // Exact boxes match every truth; injected boxes stay below matching IoU.
  CHECK(tp == total_boxes(gt));
  REQUIRE(fp > 0);
  const double measured = static_cast<double>(tp) / static_cast<double>(tp + fp);
  CHECK(measured == doctest::Approx(0.5).epsilon(0.05));
  // Order-preserving law: hit scores concentrate above the injected ones.
  CHECK(tp_score / static_cast<double>(tp) >
        fp_score / static_cast<double>(fp) + 0.15);
}

TEST_CASE("suppression injection turns covered truths into score misses") {
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 150, BoxCount{1, 1}, 23);
  BranchProfile prof;  // recall 1, precision 1, jitter 0
  prof.suppressed_score_frac = 1.0;
  const BranchPredictions preds = simulate_branch(gt, vocab(), prof, 24);

  for (const auto& [id, dets] : preds.per_image) {
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].score >= 0.02);
    CHECK(dets[0].score < 0.25);  // always under the operating threshold
  }

  const auto buckets = decompose_errors(preds, gt, vocab());
  const ErrorBucketCounts& cz = buckets.at("cz");
  CHECK(cz.n_pa == 0);
  CHECK(cz.n_wc == 0);
  CHECK(cz.n_cs == 150);
  CHECK(cz.n_ld == 0);
  CHECK(hcec(cz) == 0.0);  // nothing recoverable by adding boxes
  for (const auto& [code, b] : buckets)
    if (code != "cz") CHECK(b.total() == 0);
}

TEST_CASE("branch profiles reject unknown classes and out-of-range rates") {
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 5, BoxCount{1, 1}, 25);
  BranchProfile unknown;
  unknown.recall["pothole"] = 0.5;
  CHECK_THROWS_AS(simulate_branch(gt, vocab(), unknown, 1), MissingClass);

  BranchProfile high;
  high.precision["cz"] = 1.5;
  CHECK_THROWS_AS(simulate_branch(gt, vocab(), high, 1), InvalidArgument);

  BranchProfile low;
  low.recall["cz"] = -0.1;
  CHECK_THROWS_AS(simulate_branch(gt, vocab(), low, 1), InvalidArgument);
}

TEST_CASE("equal-precision branches fuse to bit-identical results") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 200, BoxCount{1, 2}, 31);
  REQUIRE(count_class(gt, "cz") > 0);

  BranchProfile pa;
  pa.branch_id = "a";
  pa.precision["cz"] = 0.7;
  pa.jitter = 0.02;
  BranchProfile pb;
  pb.branch_id = "b";
  pb.precision["cz"] = 0.7;
  pb.recall["cz"] = 0.6;
  pb.jitter = 0.02;

  const auto branch_a = simulate_branch(gt, vocab(), pa, 32);
  const auto branch_b = simulate_branch(gt, vocab(), pb, 33);
  const DominanceResult res =
      dominance_experiment(gt, {{branch_a, pa}, {branch_b, pb}}, "cz", vocab());

  CHECK(res.precision_variance == 0.0);
  CHECK(res.ap_class_weighted == res.ap_uniform);  // identical weight maps
  CHECK(!res.strict_gain);
  CHECK(!res.added_recall);
  CHECK(res.calibration_order_preserved);
}

TEST_CASE("precision-weighted fusion records variance and added recall") {
  const GroundTruthSet gt =
      generate_scene(default_class_distribution(), 200, BoxCount{1, 2}, 31);

  BranchProfile hi;
  hi.branch_id = "hi";
  hi.precision["cz"] = 0.9;
  hi.recall["cz"] = 0.9;
  hi.jitter = 0.02;
  BranchProfile lo;
  lo.branch_id = "lo";
  lo.precision["cz"] = 0.3;
  lo.recall["cz"] = 0.4;
  lo.jitter = 0.02;

  const auto branch_hi = simulate_branch(gt, vocab(), hi, 34);
  const auto branch_lo = simulate_branch(gt, vocab(), lo, 35);
  const DominanceResult res = dominance_experiment(
      gt, {{branch_hi, hi}, {branch_lo, lo}}, "cz", vocab());

  CHECK(res.precision_variance == doctest::Approx(0.09).epsilon(1e-9));
  CHECK(res.added_recall);
  CHECK(res.calibration_order_preserved);
  CHECK(res.ap_uniform >= 0.0);
  CHECK(res.ap_uniform <= 1.0);
  CHECK(res.ap_class_weighted >= 0.0);
  CHECK(res.ap_class_weighted <= 1.0);

  // Scrambling the calibration flag is recorded as an assumption violation.
  BranchProfile lo_scrambled = lo;
  lo_scrambled.order_preserving = false;
  const DominanceResult res2 = dominance_experiment(
      gt, {{branch_hi, hi}, {branch_lo, lo_scrambled}}, "cz", vocab());
  CHECK(!res2.calibration_order_preserved);
}

TEST_CASE("dominance experiment validates its inputs") {
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 20, BoxCount{1, 1}, 41);
  BranchProfile prof;
  const auto preds = simulate_branch(gt, vocab(), prof, 42);

  CHECK_THROWS_AS(dominance_experiment(gt, {{preds, prof}}, "cz", vocab()),
                  InvalidArgument);
  // The scene holds no ssf truth, so the hard-class AP cannot be read off.
  CHECK_THROWS_AS(
      dominance_experiment(gt, {{preds, prof}, {preds, prof}}, "ssf", vocab()),
      MissingClass);

  BranchPredictions truncated = preds;
  truncated.per_image.erase(truncated.per_image.begin());
  CHECK_THROWS_AS(
      dominance_experiment(gt, {{preds, prof}, {truncated, prof}}, "cz", vocab()),
      ManifestMismatch);
}

TEST_CASE("union-arm gain is non-decreasing in the recoverable-error share") {
  // Grid of branches over one class with no drift and no wrong-class hits:
  // misses split between pure absence and suppressed scores only. As recall
  // falls, the absence share (and with it the concentration score) rises,
  // and so does the gain a low-threshold union can realize.
  const GroundTruthSet gt = generate_scene({{"cz", 1.0}}, 300, BoxCount{1, 1}, 7007);

  FusionPolicy union_policy;
  for (const auto& code : vocab().codes()) {
    PolicyArm arm;
    arm.kind = code == "cz" ? ArmKind::UnionLowThreshold : ArmKind::KeepGlobal;
    arm.sigma_c = 0.10;
    union_policy.per_class[code] = arm;
  }

  BranchProfile spec;
  spec.branch_id = "specialist";
  spec.default_recall = 0.0;
  spec.recall["cz"] = 0.9;
  spec.precision["cz"] = 1.0;

  const std::vector<double> recalls = {0.95, 0.7, 0.4, 0.1};
  std::vector<double> concentration, gain;
  for (std::size_t i = 0; i < recalls.size(); ++i) {
    BranchProfile glob;
    glob.branch_id = "global";
    glob.recall["cz"] = recalls[i];
    glob.suppressed_score_frac = 0.5;
    const auto global_branch =
        simulate_branch(gt, vocab(), glob, 7100 + static_cast<std::uint64_t>(i));
    const auto repair =
        simulate_branch(gt, vocab(), spec, 7200 + static_cast<std::uint64_t>(i));

    const auto buckets = decompose_errors(global_branch, gt, vocab());
    const ErrorBucketCounts& b = buckets.at("cz");
    CHECK(b.n_wc == 0);  // single-class scene, no false positives
    CHECK(b.n_ld == 0);  // no jitter -> no drifted boxes
    concentration.push_back(hcec(b));

    const FusedOutput fused =
        apply_policy(union_policy, global_branch, {{"cz", repair}}, vocab());
    const double before = evaluate(global_branch, gt, vocab()).per_class_ap50.at("cz");
    const double after =
        evaluate(fused.detections, gt, vocab()).per_class_ap50.at("cz");
    gain.push_back(after - before);
  }

  for (std::size_t i = 1; i < concentration.size(); ++i)
    CHECK(concentration[i] > concentration[i - 1]);  // the grid spans distinct ranks
  CHECK(gain.back() > gain.front());
  CHECK(spearman(concentration, gain) >= 0.999);
}

TEST_CASE("end-to-end scenario raises the hard class and preserves the rest") {
  ScenarioConfig cfg;
  cfg.n_images = 300;
  cfg.n_trials = 0;
  const ScenarioBundle bundle = hcrp_end_to_end(42, cfg);

  CHECK(bundle.audit.global_best == "global");
  REQUIRE(bundle.hard_classes == std::set<std::string>{"cz"});
  CHECK(bundle.profiles.at("cz").role == ClassVocabulary::Role::Hard);
  CHECK(bundle.eval_before.per_class_ap50.at("cz") < 0.3);

  // The weak class misses mostly by absence, so the union arm is selected.
  const ErrorBucketCounts& cz = bundle.buckets.at("cz");
  CHECK(cz.n_pa > 0);
  CHECK(cz.n_pa > cz.n_cs);
  CHECK(bundle.policy.per_class.at("cz").kind == ArmKind::UnionLowThreshold);
  for (const auto& [code, arm] : bundle.policy.per_class)
    if (code != "cz") CHECK(arm.kind == ArmKind::KeepGlobal);

  CHECK(bundle.fused.detections.branch_id == "edccf");
  CHECK(bundle.eval_after.per_class_ap50.at("cz") >
        bundle.eval_before.per_class_ap50.at("cz"));
  CHECK(bundle.eval_after.map50 > bundle.eval_before.map50);
  CHECK(bundle.preservation.satisfied());

  // Byte preservation: every non-routed detection survives unchanged and in
  // its original order on every image.
  for (const auto& [id, gdets] : bundle.global_branch.per_image) {
    std::vector<Detection> expect, got;
    for (const auto& d : gdets)
      if (d.class_code != "cz") expect.push_back(d);
    for (const auto& d : bundle.fused.detections.per_image.at(id))
      if (d.class_code != "cz") got.push_back(d);
    CHECK(expect == got);
  }

  CHECK(bundle.trials.rows.empty());
  CHECK(bundle.reports.empty());
}

TEST_CASE("end-to-end scenario runs paired subset trials when asked") {
  ScenarioConfig cfg;
  cfg.n_images = 300;
  cfg.n_trials = 5;
  cfg.subset_size = 200;
  cfg.n_resamples = 50;
  const ScenarioBundle bundle = hcrp_end_to_end(42, cfg);

  CHECK(bundle.trials.n_trials == 5);
  CHECK(bundle.trials.subset_size == 200);
  REQUIRE(bundle.trials.rows.size() == 10);  // map50 + the hard class, per trial
  for (const auto& row : bundle.trials.rows) {
    CHECK((row.metric == "map50" || row.metric == "ap50:cz"));
    CHECK(row.delta == row.value_candidate - row.value_baseline);
  }

  REQUIRE(bundle.reports.count("map50") == 1);
  REQUIRE(bundle.reports.count("ap50:cz") == 1);
  const TestReport& hard = bundle.reports.at("ap50:cz");
  CHECK(hard.n_trials == 5);
  CHECK(hard.k_comparisons == 15);
  CHECK(hard.n_resamples == 50);
  CHECK(hard.p_raw > 0.0);
  CHECK(hard.p_raw <= 1.0);
  CHECK(hard.p_adjusted >= hard.p_raw);
  CHECK(hard.ci_lo <= hard.ci_hi);
  CHECK(hard.win_rate >= 0.0);
  CHECK(hard.win_rate <= 1.0);
}

TEST_CASE("hcrp_end_to_end rejects unknown hard classes") {
  ScenarioConfig cfg;
  cfg.n_images = 10;
  cfg.n_trials = 0;
  cfg.hard_class = "pothole";
  CHECK_THROWS_AS(hcrp_end_to_end(1, cfg), MissingClass);
}

TEST_CASE("reference evaluator agrees with the production evaluator") {
  SUBCASE("hand-checked two-image instance") {
    GroundTruthSet gt;
    gt.per_image["a"] = {GtInstance{"cz", Box{0, 0, 1, 1}},};
    gt.per_image["b"] = {GtInstance{"cz", Box{3, 3, 1, 1}},};
    BranchPredictions preds;
    preds.branch_id = "p";
    preds.per_image["a"] = {Detection{"cz", Box{0, 0, 1, 1}, 0.9},
                            Detection{"cz", Box{5, 5, 1, 1}, 0.5}};
    preds.per_image["b"] = {};

    const EvalResult fast = evaluate(preds, gt, vocab());
    const EvalResult slow = naive_evaluate(preds, gt, vocab());
    // One hit then one false positive over two truths: the precision
    // envelope is 1 up to recall 0.5 and empty past it.
    CHECK(fast.per_class_ap50.at("cz") == 51.0 / 101.0);
    CHECK(slow.per_class_ap50.at("cz") == 51.0 / 101.0);
    CHECK(fast.map50 == slow.map50);
    CHECK(fast.map5095 == slow.map5095);
    // Exact boxes survive every threshold; averaging ten identical AP values
    // costs at most a few ulp.
    CHECK(fast.map5095 == doctest::Approx(51.0 / 101.0).epsilon(1e-14));
  }

  SUBCASE("randomized equivalence sweep") {
    const std::vector<std::string> codes = {"zxlf", "cz", "kc"};
    Rng rng(20240818);
    for (int trial = 0; trial < 60; ++trial) {
      const int n_images = 1 + static_cast<int>(rng.below(4));
      GroundTruthSet gt;
      BranchPredictions preds;
      preds.branch_id = "rand";
      for (int i = 0; i < n_images; ++i) {
        const std::string id = "img_" + std::to_string(i);
        auto& truths = gt.per_image[id];
        auto& dets = preds.per_image[id];
        const int n_gt = static_cast<int>(rng.below(4));
        for (int g = 0; g < n_gt; ++g) {
          const Box box{rng.uniform(0.0, 0.8), rng.uniform(0.0, 0.8),
                        rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
          truths.push_back(GtInstance{codes[rng.below(codes.size())], box});
        }
        const int n_det = static_cast<int>(rng.below(5));
        for (int d = 0; d < n_det; ++d) {
          // Half the boxes shadow a truth so matches and ties actually occur;
          // scores land on a coarse grid to exercise tie handling.
          Box box{rng.uniform(0.0, 0.8), rng.uniform(0.0, 0.8),
                  rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
          if (!truths.empty() && rng.uniform() < 0.5)
            box = truths[rng.below(truths.size())].box;
          const double score = (1.0 + static_cast<double>(rng.below(9))) / 10.0;
          dets.push_back(Detection{codes[rng.below(codes.size())], box, score});
        }
      }

      const EvalResult fast = evaluate(preds, gt, vocab());
      const EvalResult slow = naive_evaluate(preds, gt, vocab());
      CHECK(fast.n_images == slow.n_images);
      CHECK(fast.map50 == slow.map50);
      CHECK(fast.map5095 == slow.map5095);
      REQUIRE(fast.per_class_ap50.size() == slow.per_class_ap50.size());
      for (const auto& [code, ap] : fast.per_class_ap50) {
        REQUIRE(slow.per_class_ap50.count(code) == 1);
        CHECK(ap == slow.per_class_ap50.at(code));
      }
      for (const auto& [code, ap] : fast.per_class_ap5095) {
        REQUIRE(slow.per_class_ap5095.count(code) == 1);
        CHECK(ap == slow.per_class_ap5095.at(code));
      }
    }
  }

  SUBCASE("mismatched manifests are rejected") {
    GroundTruthSet gt;
    gt.per_image["a"] = {GtInstance{"cz", Box{0, 0, 1, 1}}};
    BranchPredictions preds;
    preds.per_image["b"] = {};
    CHECK_THROWS_AS(naive_evaluate(preds, gt, vocab()), ManifestMismatch);
  }
}
