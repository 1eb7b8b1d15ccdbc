#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edccf/matching.hpp"
#include "edccf/types.hpp"

namespace edccf {

struct LabeledScore {
  double score = 0;
  bool is_tp = false;
};

// Labels one class's detections as TP/FP by greedy matching at iou_tp,
// pooled across images in image order.
std::vector<LabeledScore> label_class_detections(const BranchPredictions& preds,
                                                 const GroundTruthSet& gt,
                                                 const std::string& class_code,
                                                 double iou_tp = 0.50);

struct CalibrationFit {
  std::string class_code;
  double a = 0;
  double b = 0;
  double fit_loss = 0;          // mean binary cross-entropy on the fit split
  double holdout_ap_delta = 0;  // ranking AP(transformed) - AP(raw) on holdout
  bool converged = false;
  int iterations = 0;
};

struct CrcConfig {
  double grad_tol = 1e-8;
  int max_iters = 100;
  double slope_cap = 50.0;  // |a| is clamped here; separable data otherwise diverges
};

// Fits the per-class logistic recalibration s' = sigmoid(a*s + b) by
// Newton-damped binary cross-entropy on a seed-deterministic split.
// split_fraction is the share used for fitting; the rest is holdout.
// Requires at least 10 labeled detections. Non-convergence within
// max_iters is reported via `converged`, not thrown.
CalibrationFit fit_crc(const std::vector<LabeledScore>& labeled,
                       const std::string& class_code,
                       double split_fraction, std::uint64_t seed,
                       const CrcConfig& config = {});

// Applies a fitted transform to one class of a branch.
BranchPredictions apply_crc(const BranchPredictions& preds,
                            const std::string& class_code, double a, double b);

struct RcvConfig {
  double iou_cluster = 0.55;
  double score_floor = 1e-3;
};

struct RouteSweep {
  std::string hard_class;
  std::vector<double> alphas;
  std::map<double, EvalResult> per_alpha;
  double best_alpha = 0;
  // True when the best route's objective (hard AP50, then mAP50) exactly
  // equals the unmodified global branch's; no improvement is claimed then.
  bool best_matches_baseline = false;
  double hard_ap_gain_over_baseline = 0;
};

// Route-contribution sweep for one hard class: blends the global branch's
// hard-class detections with a candidate branch's at each alpha (WBF weights
// (1-alpha, alpha)); alpha = 0 and alpha = 1 copy the respective source
// verbatim. Best alpha maximizes hard-class AP50, ties broken by mAP50,
// then by the smaller alpha.
RouteSweep rcv_sweep(const BranchPredictions& global_branch,
                     const BranchPredictions& candidate_branch,
                     const GroundTruthSet& gt, const ClassVocabulary& vocab,
                     const std::string& hard_class,
                     const std::vector<double>& alphas = {0.0, 0.25, 0.5, 0.75, 1.0},
                     const RcvConfig& config = {});

}  // namespace edccf
