#include "edccf/error_decomposition.hpp"

#include <algorithm>
#include <numeric>

namespace edccf {

std::map<std::string, ErrorBucketCounts> decompose_errors(
    const BranchPredictions& preds, const GroundTruthSet& gt,
    const ClassVocabulary& vocab, const DecompositionThresholds& th) {
  if (!(th.sigma_op > 0 && th.sigma_op < 1))
    throw InvalidThresholds("sigma_op must lie in (0, 1)");
  if (!(th.iou_pa > 0 && th.iou_pa < th.iou_tp && th.iou_tp < 1))
    throw InvalidThresholds("need 0 < iou_pa < iou_tp < 1");
  if (preds.per_image.size() != gt.per_image.size())
    throw ManifestMismatch("prediction and truth image sets differ in size");

  std::map<std::string, ErrorBucketCounts> buckets;
  for (const auto& code : vocab.codes()) buckets[code];  // zero every class

  for (const auto& [id, truths] : gt.per_image) {
    auto pit = preds.per_image.find(id);
    if (pit == preds.per_image.end())
      throw ManifestMismatch("image missing from predictions: " + id);
    const auto& dets = pit->second;

    // Operating-point matching per class marks the recovered truths.
    std::vector<bool> matched(truths.size(), false);
    for (const auto& code : vocab.codes()) {
      std::vector<Detection> class_dets;
      for (const auto& d : dets)
        if (d.class_code == code && d.score >= th.sigma_op) class_dets.push_back(d);
      std::vector<Box> class_boxes;
      std::vector<std::size_t> class_idx;
      for (std::size_t j = 0; j < truths.size(); ++j)
        if (truths[j].class_code == code) {
          class_boxes.push_back(truths[j].box);
          class_idx.push_back(j);
        }
      if (class_boxes.empty()) continue;
      for (const auto& rec : match_class(class_dets, class_boxes, th.iou_tp))
        if (rec.matched_gt) matched[class_idx[static_cast<std::size_t>(*rec.matched_gt)]] = true;
    }

    // Every missed truth lands in exactly one bucket.
    for (std::size_t j = 0; j < truths.size(); ++j) {
      if (matched[j]) continue;
      const auto& truth = truths[j];
      ErrorBucketCounts& bc = buckets.at(truth.class_code);

      double best_any = 0;
      bool wc_confident = false;       // cross-class, confident, covering
      bool cs_suppressed = false;      // same-class, covering, score < sigma_op
      bool ld_drift = false;           // same-class, confident, loose overlap
      bool same_class_touch = false;   // same-class at >= iou_pa, any score
      for (const auto& d : dets) {
        const double v = iou(d.box, truth.box);
        if (v > best_any) best_any = v;
        if (v < th.iou_pa) continue;
        const bool same = d.class_code == truth.class_code;
        if (same) same_class_touch = true;
        if (!same && d.score >= th.sigma_op && v >= th.iou_tp) wc_confident = true;
        if (same && v >= th.iou_tp && d.score < th.sigma_op) cs_suppressed = true;
        if (same && d.score >= th.sigma_op && v < th.iou_tp) ld_drift = true;
      }

      if (best_any < th.iou_pa) {
        ++bc.n_pa;
      } else if (wc_confident) {
        ++bc.n_wc;
      } else if (cs_suppressed) {
        ++bc.n_cs;
      } else if (ld_drift) {
        ++bc.n_ld;
      } else if (same_class_touch) {
        // Same-class signal exists but fits no rule above: either a
        // confident covering detection consumed by another truth, or a
        // low-score loose overlap. Both are localization-flavored.
        ++bc.n_ld;
      } else {
        // Only cross-class signal at loose overlap or low score.
        ++bc.n_wc;
      }
    }
  }
  return buckets;
}

double hcec(const ErrorBucketCounts& c, double eps) {
  if (!(eps > 0)) throw InvalidThresholds("eps must be positive");
  const double recoverable = static_cast<double>(c.n_pa + c.n_wc);
  return recoverable / (static_cast<double>(c.total()) + eps);
}

double bsr(double map_all_global_best, double map_all_class_best, double eps) {
  if (!(eps > 0)) throw InvalidThresholds("eps must be positive");
  const double drop = map_all_global_best - map_all_class_best;
  return std::max(0.0, drop / (map_all_global_best + eps));
}

BranchRoleAudit audit_branches(const std::vector<BranchPredictions>& branches,
                               const GroundTruthSet& gt,
                               const ClassVocabulary& vocab) {
  if (branches.empty()) throw InvalidArgument("at least one branch is required");

  BranchRoleAudit audit;
  for (const auto& b : branches) {
    if (std::count(audit.branch_order.begin(), audit.branch_order.end(), b.branch_id))
      throw InvalidArgument("duplicate branch id: " + b.branch_id);
    audit.branch_order.push_back(b.branch_id);
    const EvalResult ev = evaluate(b, gt, vocab);
    audit.map_all_by_branch[b.branch_id] = ev.map50;
    audit.ap50_by_branch[b.branch_id] = ev.per_class_ap50;
  }

  // Ties resolve to the earlier-registered branch.
  audit.global_best = audit.branch_order.front();
  for (const auto& id : audit.branch_order)
    if (audit.map_all_by_branch.at(id) > audit.map_all_by_branch.at(audit.global_best))
      audit.global_best = id;

  for (const auto& [code, ap] : audit.ap50_by_branch.at(audit.branch_order.front())) {
    std::string best = audit.branch_order.front();
    for (const auto& id : audit.branch_order) {
      const auto& per_class = audit.ap50_by_branch.at(id);
      auto it = per_class.find(code);
      const double v = it == per_class.end() ? 0.0 : it->second;
      if (v > audit.ap50_by_branch.at(best).at(code)) best = id;
    }
    audit.class_best[code] = best;
  }
  return audit;
}

std::string to_string(DominantMode m) {
  switch (m) {
    case DominantMode::PaWc: return "PA+WC";
    case DominantMode::Pa: return "PA";
    case DominantMode::Wc: return "WC";
    case DominantMode::Cs: return "CS";
    case DominantMode::Ld: return "LD";
    case DominantMode::Mixed: return "mixed";
    case DominantMode::LowError: return "low-error";
  }
  return "?";
}

namespace {

DominantMode dominant_mode_of(const ErrorBucketCounts& c, double hcec_value,
                              long long low_error_floor) {
  if (c.total() < low_error_floor) return DominantMode::LowError;
  if (hcec_value > 0.5) return DominantMode::PaWc;
  const long long counts[4] = {c.n_pa, c.n_wc, c.n_cs, c.n_ld};
  const DominantMode modes[4] = {DominantMode::Pa, DominantMode::Wc,
                                 DominantMode::Cs, DominantMode::Ld};
  int arg = 0;
  bool strict = true;
  for (int i = 1; i < 4; ++i) {
    if (counts[i] > counts[arg]) {
      arg = i;
      strict = true;
    } else if (counts[i] == counts[arg]) {
      strict = false;
    }
  }
  return strict ? modes[arg] : DominantMode::Mixed;
}

}  // namespace

std::map<std::string, ClassReliabilityProfile> classify_roles(
    const BranchRoleAudit& audit,
    const std::map<std::string, ErrorBucketCounts>& buckets,
    const RoleConfig& config) {
  if (!(config.tau_hard > 0 && config.tau_hard < 1))
    throw InvalidThresholds("tau_hard must lie in (0, 1)");

  const auto& global_ap = audit.ap50_by_branch.at(audit.global_best);
  const double global_map = audit.map_all_by_branch.at(audit.global_best);

  std::map<std::string, ClassReliabilityProfile> profiles;
  for (const auto& [code, best_branch] : audit.class_best) {
    auto bit = buckets.find(code);
    if (bit == buckets.end())
      throw MissingClass("no error buckets for class: " + code);
    const ErrorBucketCounts& bc = bit->second;

    ClassReliabilityProfile p;
    p.class_code = code;
    p.ap50 = global_ap.at(code);
    p.hcec = hcec(bc, config.eps);
    p.bsr = bsr(global_map, audit.map_all_by_branch.at(best_branch), config.eps);
    p.role = p.ap50 < config.tau_hard ? ClassVocabulary::Role::Hard
                                      : ClassVocabulary::Role::Stable;
    p.preferred_branch = best_branch;
    p.dominant_mode = dominant_mode_of(bc, p.hcec, config.low_error_floor);
    profiles.emplace(code, std::move(p));
  }
  return profiles;
}

}  // namespace edccf
