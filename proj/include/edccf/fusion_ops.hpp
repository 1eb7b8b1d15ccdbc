#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "edccf/types.hpp"

namespace edccf {

// All operators here are single-class and single-image: callers partition by
// class and image first, so no operator can mix classes.

// Greedy non-maximum suppression. Keeps detections in descending score
// order, dropping any box whose IoU with an already-kept box is >= iou_thresh.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh);

enum class SoftNmsMode { Linear, Gaussian };

// Iterative score decay instead of hard suppression. Linear mode multiplies
// overlapping scores by max(0, 1 - slope*IoU); Gaussian mode by
// exp(-IoU^2 / sigma). Detections decayed below score_floor are dropped.
std::vector<Detection> soft_nms(std::vector<Detection> dets,
                                double sigma_or_slope,
                                SoftNmsMode mode = SoftNmsMode::Linear,
                                double score_floor = 1e-3);

struct FusionWeights {
  std::map<std::string, double> per_branch;

  // Scaled to sum 1. Throws InvalidArgument on negative weights or an
  // all-zero/empty map.
  FusionWeights normalized() const;
};

struct ClusterMember {
  std::string branch_id;
  int det_index = 0;
  double weight = 0;
};

struct ClusterTrace {
  Detection fused;
  std::vector<ClusterMember> members;
};

// Weighted box fusion. Boxes from all branches are visited in descending
// score order and joined to the existing cluster of highest IoU >=
// iou_cluster (against the running fused box), else they seed a new cluster.
// Fused coordinates are score-and-weight weighted means; the fused score is
// the weighted mean score scaled by min(n_members, n_branches)/n_branches,
// so single-source clusters are penalized. n_branches counts the branches
// registered in `weights`, not those contributing boxes.
std::vector<ClusterTrace> wbf(
    const std::vector<std::pair<std::string, std::vector<Detection>>>& branch_dets,
    const FusionWeights& weights, double iou_cluster, double score_floor = 1e-3);

// Keeps every detection from both sources with score >= sigma_c, then
// deduplicates greedily at dedup_iou keeping the higher score.
std::vector<Detection> union_low_threshold(const std::vector<Detection>& global_dets,
                                           const std::vector<Detection>& repair_dets,
                                           double sigma_c, double dedup_iou = 0.55);

// Monotone score recalibration s' = 1/(1 + exp(-(a*s + b))) applied only to
// detections of target_class; all other detections pass through untouched.
std::vector<Detection> score_reprojection(std::vector<Detection> dets,
                                          const std::string& target_class,
                                          double a, double b);

enum class FusionOp { Nms, SoftNms, Wbf, Union };

struct UniformFusionConfig {
  FusionOp op = FusionOp::Nms;
  double iou_thresh = 0.5;       // nms
  double sigma_or_slope = 1.0;   // soft-nms
  SoftNmsMode mode = SoftNmsMode::Linear;
  double score_floor = 1e-3;
  double sigma_c = 0.10;         // union
  double dedup_iou = 0.55;       // union
  double iou_cluster = 0.55;     // wbf
  FusionWeights weights;         // wbf; empty -> uniform over inputs
};

// Applies one operator uniformly to every image and class. Nms/SoftNms pool
// all branches' detections; Union requires exactly two branches (global,
// repair); Wbf fuses all branches under `weights`.
BranchPredictions fuse_uniform(const std::vector<BranchPredictions>& branches,
                               const UniformFusionConfig& config);

}  // namespace edccf
