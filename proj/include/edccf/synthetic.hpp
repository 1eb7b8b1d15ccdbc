#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "edccf/calibration.hpp"
#include "edccf/error_decomposition.hpp"
#include "edccf/matching.hpp"
#include "edccf/policy.hpp"
#include "edccf/stats.hpp"
#include "edccf/types.hpp"

namespace edccf {

// Long-tailed road-distress class mix used by the bundled scenario
// (exact count ratios, summing to 1).
std::map<std::string, double> default_class_distribution();

struct BoxCount {
  int min_boxes = 1;
  int max_boxes = 2;
};

// Unit-square scenes: each image draws a uniform box count, each box a
// class from the distribution and a side length of 5-20% of the image.
// Image ids are "img_000000", "img_000001", ...
GroundTruthSet generate_scene(const std::map<std::string, double>& class_distribution,
                              int n_images, const BoxCount& boxes, std::uint64_t seed);

// Detector simulator with controllable per-class precision/recall.
struct BranchProfile {
  std::string branch_id = "sim";
  std::map<std::string, double> recall;     // truth -> detection probability
  std::map<std::string, double> precision;  // governs FP volume and score laws
  double default_recall = 1.0;
  double default_precision = 1.0;
  double jitter = 0.0;        // box corner/extent noise, fraction of size
  double score_noise = 0.1;   // sd of the score laws
  // When true, TP scores concentrate above FP scores (means 0.6 +/- 0.3*pi);
  // when false both share the same law, modelling a miscalibrated detector.
  bool order_preserving = true;
  // Fraction of TPs re-drawn with a sub-threshold score (suppression injector).
  double suppressed_score_frac = 0.0;

  double recall_for(const std::string& code) const {
    auto it = recall.find(code);
    return it == recall.end() ? default_recall : it->second;
  }
  double precision_for(const std::string& code) const {
    auto it = precision.find(code);
    return it == precision.end() ? default_precision : it->second;
  }
};

// Per truth: Bernoulli(recall) detection with jittered box and a score from
// the profile's law; per class: false positives sized so the expected
// precision matches the profile, placed to avoid same-class truths
// (IoU <= 0.1). Fully deterministic for a fixed seed.
BranchPredictions simulate_branch(const GroundTruthSet& gt,
                                  const ClassVocabulary& vocab,
                                  const BranchProfile& profile, std::uint64_t seed);

struct DominanceResult {
  double ap_uniform = 0;         // hard-class AP50, uniform-weight fusion
  double ap_class_weighted = 0;  // hard-class AP50, precision-proportional weights
  double precision_variance = 0; // Var over branches of hard-class precision
  bool added_recall = false;     // a higher-precision branch uniquely covers a truth
  bool strict_gain = false;      // ap_class_weighted > ap_uniform
  bool calibration_order_preserved = false;
};

// Fuses the hard class across branches twice (uniform vs precision-
// proportional WBF weights) and evaluates both. With equal precisions the
// two fusions are bit-identical, so the delta is exactly zero.
DominanceResult dominance_experiment(
    const GroundTruthSet& gt,
    const std::vector<std::pair<BranchPredictions, BranchProfile>>& branches,
    const std::string& hard_class, const ClassVocabulary& vocab,
    double iou_cluster = 0.55);

struct ScenarioConfig {
  int n_images = 600;
  BoxCount boxes;
  std::string hard_class = "cz";
  int n_trials = 50;       // 0 skips the paired-trial stage
  int subset_size = 450;
  int k_comparisons = 15;
  int n_resamples = 1000;
  PolicyConfig policy;
};

struct ScenarioBundle {
  GroundTruthSet gt;
  BranchPredictions global_branch;
  BranchPredictions specialist_branch;
  std::map<std::string, ErrorBucketCounts> buckets;
  BranchRoleAudit audit;
  std::map<std::string, ClassReliabilityProfile> profiles;
  FusionPolicy policy;
  FusedOutput fused;
  EvalResult eval_before;
  EvalResult eval_after;
  std::set<std::string> hard_classes;
  PreservationReport preservation;
  PairedTrialTable trials;
  std::map<std::string, TestReport> reports;
};

// End-to-end reference scenario: a long-tail scene, a strong global branch
// that is weak on one class, and a single-class specialist; diagnosis,
// policy derivation, fusion, preservation check, and (optionally) paired
// subset trials with the full statistical report.
ScenarioBundle hcrp_end_to_end(std::uint64_t seed, const ScenarioConfig& config = {});

// Brute-force reference evaluator: independent matching and AP code kept
// deliberately simple (quadratic scans, no envelope sharing) for
// equivalence tests against `evaluate`.
EvalResult naive_evaluate(const BranchPredictions& preds, const GroundTruthSet& gt,
                          const ClassVocabulary& vocab);

}  // namespace edccf
