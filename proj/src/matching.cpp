#include "edccf/matching.hpp"

#include <algorithm>
#include <numeric>

namespace edccf {

double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
  const double iy = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return 0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

namespace {

std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

}  // namespace

std::vector<MatchRecord> match_class(const std::vector<Detection>& dets,
                                     const std::vector<Box>& gts,
                                     double iou_thresh,
                                     const std::string& image_id) {
  if (!(iou_thresh > 0 && iou_thresh < 1))
    throw InvalidThresholds("iou threshold must lie in (0, 1)");

  std::vector<MatchRecord> records;
  records.reserve(dets.size());
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t idx : score_order(dets)) {
    const Detection& d = dets[idx];
    MatchRecord rec;
    rec.image_id = image_id;
    rec.det_index = static_cast<int>(idx);
    rec.score = d.score;
    int best = -1;
    double best_iou = 0;
    double best_any = 0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = iou(d.box, gts[j]);
      if (v > best_any) best_any = v;
      if (taken[j] || v < iou_thresh) continue;
      if (v > best_iou) {  // strict: IoU ties keep the lower truth index
        best_iou = v;
        best = static_cast<int>(j);
      }
    }
    rec.best_iou_any = best_any;
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      rec.matched_gt = best;
      rec.iou = best_iou;
    } else {
      rec.iou = best_any;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

double average_precision(std::vector<MatchRecord> matches, std::size_t n_gt) {
  if (n_gt == 0) return 0;
  std::stable_sort(matches.begin(), matches.end(),
                   [](const MatchRecord& a, const MatchRecord& b) {
                     return a.score > b.score;
                   });
  const std::size_t n = matches.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (matches[i].matched_gt) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Right-to-left precision envelope, then one sweep over the recall grid.
  for (std::size_t i = n; i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0;
  std::size_t lo = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (lo < n && recall[lo] < r) ++lo;
    if (lo == n) break;  // recall never reaches r; later grid points add 0
    sum += precision[lo];
  }
  return sum / 101.0;
}

namespace {

// Matched flags for one image/class at one threshold, reusing a
// precomputed IoU matrix (rows follow det score order).
void greedy_flags(const std::vector<std::vector<double>>& iou_matrix,
                  double thresh, std::vector<bool>& taken,
                  std::vector<bool>& matched_out) {
  const std::size_t n_det = iou_matrix.size();
  const std::size_t n_gt = n_det == 0 ? 0 : iou_matrix[0].size();
  taken.assign(n_gt, false);
  matched_out.assign(n_det, false);
  for (std::size_t i = 0; i < n_det; ++i) {
    int best = -1;
    double best_iou = 0;
    for (std::size_t j = 0; j < n_gt; ++j) {
      if (taken[j]) continue;
      const double v = iou_matrix[i][j];
      if (v >= thresh && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      matched_out[i] = true;
    }
  }
}

}  // namespace

EvalResult evaluate(const BranchPredictions& preds, const GroundTruthSet& gt,
                    const ClassVocabulary& vocab) {
  if (preds.per_image.size() != gt.per_image.size())
    throw ManifestMismatch("prediction and truth image sets differ in size");
  for (const auto& [id, boxes] : gt.per_image)
    if (!preds.per_image.count(id))
      throw ManifestMismatch("image missing from predictions: " + id);

  EvalResult out;
  out.n_images = gt.per_image.size();

  constexpr int kThresholds = 10;
  for (const auto& code : vocab.codes()) {
    std::size_t n_gt = 0;
    for (const auto& [id, boxes] : gt.per_image)
      for (const auto& g : boxes)
        if (g.class_code == code) ++n_gt;
    if (n_gt == 0) continue;

    // Per threshold, pooled across images in image order.
    std::vector<std::vector<MatchRecord>> pooled(kThresholds);
    std::vector<bool> taken, matched;
    for (const auto& [id, boxes] : gt.per_image) {
      const auto& dets_all = preds.per_image.at(id);
      std::vector<Detection> dets;
      for (const auto& d : dets_all)
        if (d.class_code == code) dets.push_back(d);
      std::vector<Box> gts;
      for (const auto& g : boxes)
        if (g.class_code == code) gts.push_back(g.box);

      const auto order = score_order(dets);
      std::vector<std::vector<double>> iou_matrix(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) {
        iou_matrix[i].resize(gts.size());
        for (std::size_t j = 0; j < gts.size(); ++j)
          iou_matrix[i][j] = iou(dets[order[i]].box, gts[j]);
      }
      for (int t = 0; t < kThresholds; ++t) {
        greedy_flags(iou_matrix, 0.5 + 0.05 * t, taken, matched);
        for (std::size_t i = 0; i < order.size(); ++i) {
          MatchRecord rec;
          rec.image_id = id;
          rec.det_index = static_cast<int>(order[i]);
          rec.score = dets[order[i]].score;
          if (matched[i]) rec.matched_gt = 0;  // flag only; index unused by AP
          pooled[t].push_back(std::move(rec));
        }
      }
    }

    double ap_sum = 0;
    double ap50 = 0;
    for (int t = 0; t < kThresholds; ++t) {
      const double ap = average_precision(pooled[t], n_gt);
      if (t == 0) ap50 = ap;
      ap_sum += ap;
    }
    out.per_class_ap50[code] = ap50;
    out.per_class_ap5095[code] = ap_sum / kThresholds;
  }

  if (!out.per_class_ap50.empty()) {
    for (const auto& [code, ap] : out.per_class_ap50) out.map50 += ap;
    for (const auto& [code, ap] : out.per_class_ap5095) out.map5095 += ap;
    out.map50 /= static_cast<double>(out.per_class_ap50.size());
    out.map5095 /= static_cast<double>(out.per_class_ap5095.size());
  }
  return out;
}

}  // namespace edccf
