#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edccf/types.hpp"

namespace edccf {

// Intersection-over-union of two boxes; 0 when disjoint or degenerate.
double iou(const Box& a, const Box& b);

struct MatchRecord {
  std::string image_id;
  int det_index = -1;                 // index into the input detection list
  std::optional<int> matched_gt;      // index into the truth list
  double iou = 0;                     // IoU with the matched truth, or the
                                      // best IoU against any truth if unmatched
  double best_iou_any = 0;            // max IoU against any truth (matched or not)
  double score = 0;
};

// Greedy one-to-one matching of same-class detections against truths:
// detections in descending score order (ties keep input order), each taking
// the unmatched truth with the highest IoU >= iou_thresh (ties -> lower
// truth index). Records are returned in processing (score-descending) order.
std::vector<MatchRecord> match_class(const std::vector<Detection>& dets,
                                     const std::vector<Box>& gts,
                                     double iou_thresh,
                                     const std::string& image_id = "");

// 101-point interpolated average precision: AP = mean over the recall grid
// {0.00, 0.01, ..., 1.00} of the precision envelope at recall >= r.
// Zero when n_gt is 0 or no grid point is reachable.
double average_precision(std::vector<MatchRecord> matches, std::size_t n_gt);

struct EvalResult {
  std::map<std::string, double> per_class_ap50;
  std::map<std::string, double> per_class_ap5095;
  double map50 = 0;
  double map5095 = 0;
  std::size_t n_images = 0;
};

// Per-class AP at IoU 0.50 and averaged over 0.50:0.05:0.95. Classes with
// no ground-truth instance are excluded from the per-class maps and means.
// Prediction and truth image-key sets must match exactly.
EvalResult evaluate(const BranchPredictions& preds, const GroundTruthSet& gt,
                    const ClassVocabulary& vocab);

}  // namespace edccf
