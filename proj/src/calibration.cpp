#include "edccf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edccf/fusion_ops.hpp"
#include "edccf/rng.hpp"

namespace edccf {

std::vector<LabeledScore> label_class_detections(const BranchPredictions& preds,
                                                 const GroundTruthSet& gt,
                                                 const std::string& class_code,
                                                 double iou_tp) {
  if (preds.per_image.size() != gt.per_image.size())
    throw ManifestMismatch("prediction and truth image sets differ in size");
  std::vector<LabeledScore> out;
  for (const auto& [id, truths] : gt.per_image) {
    auto pit = preds.per_image.find(id);
    if (pit == preds.per_image.end())
      throw ManifestMismatch("image missing from predictions: " + id);
    std::vector<Detection> dets;
    for (const auto& d : pit->second)
      if (d.class_code == class_code) dets.push_back(d);
    std::vector<Box> boxes;
    for (const auto& g : truths)
      if (g.class_code == class_code) boxes.push_back(g.box);
    for (const auto& rec : match_class(dets, boxes, iou_tp))
      out.push_back(LabeledScore{rec.score, rec.matched_gt.has_value()});
  }
  return out;
}

namespace {

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean binary cross-entropy of sigmoid(a*s + b) against the TP labels.
double bce_loss(const std::vector<LabeledScore>& data, double a, double b) {
  double loss = 0;
  for (const auto& d : data) {
    const double p = std::clamp(stable_sigmoid(a * d.score + b), 1e-12, 1.0 - 1e-12);
    loss += d.is_tp ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(data.size());
}

// Ranking AP of a labeled score list: descending score order (stable),
// n_gt = number of TPs.
double ranking_ap(std::vector<LabeledScore> data) {
  std::size_t n_tp = 0;
  for (const auto& d : data)
    if (d.is_tp) ++n_tp;
  if (n_tp == 0) return 0;
  std::stable_sort(data.begin(), data.end(),
                   [](const LabeledScore& x, const LabeledScore& y) {
                     return x.score > y.score;
                   });
  std::vector<MatchRecord> recs;
  recs.reserve(data.size());
  for (const auto& d : data) {
    MatchRecord r;
    r.score = d.score;
    if (d.is_tp) r.matched_gt = 0;
    recs.push_back(std::move(r));
  }
  return average_precision(std::move(recs), n_tp);
}

}  // namespace

CalibrationFit fit_crc(const std::vector<LabeledScore>& labeled,
                       const std::string& class_code, double split_fraction,
                       std::uint64_t seed, const CrcConfig& config) {
  if (labeled.size() < 10)
    throw InsufficientData("calibration needs at least 10 labeled detections, got " +
                           std::to_string(labeled.size()));
  if (!(split_fraction > 0 && split_fraction < 1))
    throw InvalidArgument("split_fraction must lie in (0, 1)");

  // Positional split: a seeded shuffle of indices decides which positions
  // fit and which hold out, so permuting entries within one side never
  // changes the other side's contents.
  const std::size_t n = labeled.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  std::size_t n_fit = static_cast<std::size_t>(std::llround(split_fraction * static_cast<double>(n)));
  n_fit = std::clamp<std::size_t>(n_fit, 1, n - 1);

  std::vector<LabeledScore> fit_set, holdout;
  fit_set.reserve(n_fit);
  holdout.reserve(n - n_fit);
  for (std::size_t i = 0; i < n; ++i)
    (i < n_fit ? fit_set : holdout).push_back(labeled[idx[i]]);

  // Damped Newton on mean BCE with a tiny ridge for singular Hessians.
  double a = 0, b = 0;
  double loss = bce_loss(fit_set, a, b);
  bool converged = false;
  int iters = 0;
  for (; iters < config.max_iters; ++iters) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (const auto& d : fit_set) {
      const double p = stable_sigmoid(a * d.score + b);
      const double r = p - (d.is_tp ? 1.0 : 0.0);
      const double w = std::max(p * (1.0 - p), 1e-12);
      ga += r * d.score;
      gb += r;
      haa += w * d.score * d.score;
      hab += w * d.score;
      hbb += w;
    }
    const double m = static_cast<double>(fit_set.size());
    ga /= m; gb /= m; haa /= m; hab /= m; hbb /= m;
    if (std::sqrt(ga * ga + gb * gb) < config.grad_tol) {
      converged = true;
      break;
    }
    double det = haa * hbb - hab * hab;
    if (det < 1e-12) {  // ridge the diagonal until invertible
      haa += 1e-6;
      hbb += 1e-6;
      det = haa * hbb - hab * hab;
    }
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    double step = 1.0;
    double next_loss = loss;
    double na = a, nb = b;
    for (int halvings = 0; halvings < 30; ++halvings) {
      na = std::clamp(a + step * da, -config.slope_cap, config.slope_cap);
      nb = b + step * db;
      next_loss = bce_loss(fit_set, na, nb);
      if (next_loss <= loss + 1e-12) break;
      step *= 0.5;
    }
    if (next_loss > loss + 1e-12) break;  // no descent direction left
    a = na;
    b = nb;
    loss = next_loss;
  }

  CalibrationFit fit;
  fit.class_code = class_code;
  fit.a = a;
  fit.b = b;
  fit.fit_loss = loss;
  fit.converged = converged;
  fit.iterations = iters;

  std::vector<LabeledScore> transformed = holdout;
  for (auto& d : transformed) d.score = stable_sigmoid(a * d.score + b);
  fit.holdout_ap_delta = ranking_ap(std::move(transformed)) - ranking_ap(holdout);
  return fit;
}

BranchPredictions apply_crc(const BranchPredictions& preds,
                            const std::string& class_code, double a, double b) {
  BranchPredictions out;
  out.branch_id = preds.branch_id;
  for (const auto& [id, dets] : preds.per_image)
    out.per_image.emplace(id, score_reprojection(dets, class_code, a, b));
  return out;
}

RouteSweep rcv_sweep(const BranchPredictions& global_branch,
                     const BranchPredictions& candidate_branch,
                     const GroundTruthSet& gt, const ClassVocabulary& vocab,
                     const std::string& hard_class,
                     const std::vector<double>& alphas, const RcvConfig& config) {
  if (alphas.empty()) throw InvalidArgument("alpha grid must be non-empty");
  for (double a : alphas)
    if (!(a >= 0 && a <= 1)) throw InvalidArgument("alpha values must lie in [0, 1]");
  if (!vocab.contains(hard_class)) throw MissingClass("unknown class: " + hard_class);
  if (candidate_branch.per_image.size() != global_branch.per_image.size())
    throw ManifestMismatch("candidate branch covers a different image set");

  const auto hard_ap = [&](const EvalResult& ev) {
    auto it = ev.per_class_ap50.find(hard_class);
    return it == ev.per_class_ap50.end() ? 0.0 : it->second;
  };

  RouteSweep sweep;
  sweep.hard_class = hard_class;
  sweep.alphas = alphas;

  const EvalResult baseline = evaluate(global_branch, gt, vocab);

  for (double alpha : alphas) {
    if (sweep.per_alpha.count(alpha)) continue;
    BranchPredictions blended;
    blended.branch_id = "rcv";
    for (const auto& [id, gdets] : global_branch.per_image) {
      auto cit = candidate_branch.per_image.find(id);
      if (cit == candidate_branch.per_image.end())
        throw ManifestMismatch("candidate branch is missing image: " + id);

      std::vector<Detection> fused;
      for (const auto& d : gdets)
        if (d.class_code != hard_class) fused.push_back(d);

      std::vector<Detection> gclass, cclass;
      for (const auto& d : gdets)
        if (d.class_code == hard_class) gclass.push_back(d);
      for (const auto& d : cit->second)
        if (d.class_code == hard_class) cclass.push_back(d);

      // Endpoints copy a source verbatim so their EvalResults match the
      // sources exactly; interior alphas blend through WBF.
      if (alpha == 0.0) {
        fused.insert(fused.end(), gclass.begin(), gclass.end());
      } else if (alpha == 1.0) {
        fused.insert(fused.end(), cclass.begin(), cclass.end());
      } else {
        FusionWeights w;
        w.per_branch["global"] = 1.0 - alpha;
        w.per_branch["candidate"] = alpha;
        for (const auto& trace : wbf({{"global", gclass}, {"candidate", cclass}}, w,
                                     config.iou_cluster, config.score_floor))
          fused.push_back(trace.fused);
      }
      blended.per_image.emplace(id, std::move(fused));
    }
    sweep.per_alpha.emplace(alpha, evaluate(blended, gt, vocab));
  }

  // Best alpha: hard-class AP50, then mAP50, then the smaller alpha.
  bool first = true;
  double best_hard = 0, best_map = 0;
  for (double alpha : alphas) {
    const EvalResult& ev = sweep.per_alpha.at(alpha);
    const double h = hard_ap(ev);
    const bool better =
        first || h > best_hard || (h == best_hard && ev.map50 > best_map) ||
        (h == best_hard && ev.map50 == best_map && alpha < sweep.best_alpha);
    if (better) {
      first = false;
      sweep.best_alpha = alpha;
      best_hard = h;
      best_map = ev.map50;
    }
  }
  sweep.hard_ap_gain_over_baseline = best_hard - hard_ap(baseline);
  sweep.best_matches_baseline =
      best_hard == hard_ap(baseline) && best_map == baseline.map50;
  return sweep;
}

}  // namespace edccf
