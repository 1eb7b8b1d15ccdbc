#include "edccf/fusion_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edccf/matching.hpp"

namespace edccf {

namespace {

std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

void require_single_class(const std::vector<Detection>& dets, const char* op) {
  for (std::size_t i = 1; i < dets.size(); ++i)
    if (dets[i].class_code != dets[0].class_code)
      throw InvalidArgument(std::string(op) + " operates on a single class at a time");
}

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh) {
  if (!(iou_thresh > 0 && iou_thresh < 1))
    throw InvalidThresholds("nms iou threshold must lie in (0, 1)");
  require_single_class(dets, "nms");
  std::vector<Detection> kept;
  for (std::size_t idx : score_order(dets)) {
    const Detection& d = dets[idx];
    bool suppressed = false;
    for (const auto& k : kept)
      if (iou(d.box, k.box) >= iou_thresh) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> soft_nms(std::vector<Detection> dets, double sigma_or_slope,
                                SoftNmsMode mode, double score_floor) {
  if (mode == SoftNmsMode::Gaussian && !(sigma_or_slope > 0))
    throw InvalidThresholds("gaussian soft-nms needs sigma > 0");
  if (mode == SoftNmsMode::Linear && !(sigma_or_slope >= 0))
    throw InvalidThresholds("linear soft-nms needs slope >= 0");
  if (!(score_floor >= 0)) throw InvalidThresholds("score_floor must be >= 0");
  require_single_class(dets, "soft_nms");

  std::vector<Detection> out;
  out.reserve(dets.size());
  std::vector<bool> alive(dets.size(), true);
  std::size_t remaining = dets.size();
  while (remaining > 0) {
    // Highest surviving score; ties keep the earliest index.
    std::size_t pick = 0;
    double best = -1;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (alive[i] && dets[i].score > best) {
        best = dets[i].score;
        pick = i;
      }
    alive[pick] = false;
    --remaining;
    out.push_back(dets[pick]);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (!alive[i]) continue;
      const double v = iou(dets[pick].box, dets[i].box);
      const double factor = mode == SoftNmsMode::Linear
                                ? std::max(0.0, 1.0 - sigma_or_slope * v)
                                : std::exp(-(v * v) / sigma_or_slope);
      dets[i].score *= factor;
      if (dets[i].score < score_floor) {
        alive[i] = false;
        --remaining;
      }
    }
  }
  return out;
}

FusionWeights FusionWeights::normalized() const {
  double sum = 0;
  for (const auto& [id, w] : per_branch) {
    if (!(w >= 0) || !std::isfinite(w))
      throw InvalidArgument("fusion weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0)) throw InvalidArgument("fusion weights must have a positive sum");
  FusionWeights out;
  for (const auto& [id, w] : per_branch) out.per_branch[id] = w / sum;
  return out;
}

std::vector<ClusterTrace> wbf(
    const std::vector<std::pair<std::string, std::vector<Detection>>>& branch_dets,
    const FusionWeights& weights, double iou_cluster, double score_floor) {
  if (!(iou_cluster > 0 && iou_cluster < 1))
    throw InvalidThresholds("wbf iou_cluster must lie in (0, 1)");
  const FusionWeights wn = weights.normalized();
  const std::size_t n_branches = wn.per_branch.size();

  struct PoolEntry {
    std::string branch_id;
    int det_index;
    double weight;
    Detection det;
  };
  std::vector<PoolEntry> pool;
  std::string class_code;
  for (const auto& [branch_id, dets] : branch_dets) {
    auto wit = wn.per_branch.find(branch_id);
    if (wit == wn.per_branch.end())
      throw InvalidArgument("no fusion weight registered for branch: " + branch_id);
    require_single_class(dets, "wbf");
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (class_code.empty()) class_code = dets[i].class_code;
      if (dets[i].class_code != class_code)
        throw InvalidArgument("wbf operates on a single class at a time");
      pool.push_back(PoolEntry{branch_id, static_cast<int>(i), wit->second, dets[i]});
    }
  }
  // Descending score; pool order (branch registration, then index) breaks ties.
  std::stable_sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.det.score > b.det.score;
  });

  struct Cluster {
    ClusterTrace trace;
    double sum_ws = 0;   // sum of weight*score
    double sum_w = 0;    // sum of weight
    double cx = 0, cy = 0, cw = 0, ch = 0;  // weight*score-weighted coordinate sums
    double ux = 0, uy = 0, uw = 0, uh = 0;  // unweighted sums, fallback when sum_ws = 0
    Box lo, hi;          // coordinate-wise member extents

    void refresh(const std::string& code) {
      Detection& f = trace.fused;
      f.class_code = code;
      const double n = static_cast<double>(trace.members.size());
      if (sum_ws > 0) {
        f.box = Box{cx / sum_ws, cy / sum_ws, cw / sum_ws, ch / sum_ws};
      } else {
        f.box = Box{ux / n, uy / n, uw / n, uh / n};
      }
      // Clamping to the member extents makes the hull invariant hold exactly
      // even when the averaging rounds a hair past a degenerate hull.
      f.box.x = std::clamp(f.box.x, lo.x, hi.x);
      f.box.y = std::clamp(f.box.y, lo.y, hi.y);
      f.box.w = std::clamp(f.box.w, lo.w, hi.w);
      f.box.h = std::clamp(f.box.h, lo.h, hi.h);
      f.score = sum_w > 0 ? sum_ws / sum_w : 0.0;
    }
  };

  std::vector<Cluster> clusters;
  for (const auto& e : pool) {
    int best = -1;
    double best_iou = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double v = iou(e.det.box, clusters[c].trace.fused.box);
      if (v >= iou_cluster && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) {
      clusters.emplace_back();
      best = static_cast<int>(clusters.size()) - 1;
    }
    Cluster& cl = clusters[static_cast<std::size_t>(best)];
    if (cl.trace.members.empty()) {
      cl.lo = cl.hi = e.det.box;
    } else {
      cl.lo.x = std::min(cl.lo.x, e.det.box.x);
      cl.lo.y = std::min(cl.lo.y, e.det.box.y);
      cl.lo.w = std::min(cl.lo.w, e.det.box.w);
      cl.lo.h = std::min(cl.lo.h, e.det.box.h);
      cl.hi.x = std::max(cl.hi.x, e.det.box.x);
      cl.hi.y = std::max(cl.hi.y, e.det.box.y);
      cl.hi.w = std::max(cl.hi.w, e.det.box.w);
      cl.hi.h = std::max(cl.hi.h, e.det.box.h);
    }
    cl.trace.members.push_back(ClusterMember{e.branch_id, e.det_index, e.weight});
    const double ws = e.weight * e.det.score;
    cl.sum_ws += ws;
    cl.sum_w += e.weight;
    cl.cx += ws * e.det.box.x;
    cl.cy += ws * e.det.box.y;
    cl.cw += ws * e.det.box.w;
    cl.ch += ws * e.det.box.h;
    cl.ux += e.det.box.x;
    cl.uy += e.det.box.y;
    cl.uw += e.det.box.w;
    cl.uh += e.det.box.h;
    cl.refresh(class_code);
  }

  std::vector<ClusterTrace> out;
  for (auto& cl : clusters) {
    // Single-source penalty: clusters confirmed by fewer branches than
    // registered are scaled by n_members/n_branches (capped at 1).
    const double n = static_cast<double>(cl.trace.members.size());
    const double cap = std::min(n, static_cast<double>(n_branches));
    cl.trace.fused.score *= cap / static_cast<double>(n_branches);
    if (cl.trace.fused.score < score_floor) continue;
    out.push_back(std::move(cl.trace));
  }
  return out;
}

std::vector<Detection> union_low_threshold(const std::vector<Detection>& global_dets,
                                           const std::vector<Detection>& repair_dets,
                                           double sigma_c, double dedup_iou) {
  if (!(sigma_c >= 0 && sigma_c < 1))
    throw InvalidThresholds("sigma_c must lie in [0, 1)");
  if (!(dedup_iou > 0 && dedup_iou < 1))
    throw InvalidThresholds("dedup_iou must lie in (0, 1)");
  require_single_class(global_dets, "union_low_threshold");
  require_single_class(repair_dets, "union_low_threshold");

  std::vector<Detection> pool;
  for (const auto& d : global_dets)
    if (d.score >= sigma_c) pool.push_back(d);
  for (const auto& d : repair_dets)
    if (d.score >= sigma_c) pool.push_back(d);
  if (!pool.empty()) require_single_class(pool, "union_low_threshold");

  // Greedy keep-higher-score dedup; sources tie toward the global branch.
  std::vector<Detection> kept;
  for (std::size_t idx : score_order(pool)) {
    const Detection& d = pool[idx];
    bool duplicate = false;
    for (const auto& k : kept)
      if (iou(d.box, k.box) >= dedup_iou) {
        duplicate = true;
        break;
      }
    if (!duplicate) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> score_reprojection(std::vector<Detection> dets,
                                          const std::string& target_class,
                                          double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw InvalidArgument("re-projection coefficients must be finite");
  for (auto& d : dets)
    if (d.class_code == target_class) d.score = stable_sigmoid(a * d.score + b);
  return dets;
}

BranchPredictions fuse_uniform(const std::vector<BranchPredictions>& branches,
                               const UniformFusionConfig& config) {
  if (branches.empty()) throw InvalidArgument("at least one input branch is required");
  if (config.op == FusionOp::Union && branches.size() != 2)
    throw InvalidArgument("union takes exactly two branches (global, repair)");
  for (std::size_t i = 1; i < branches.size(); ++i)
    if (branches[i].per_image.size() != branches[0].per_image.size())
      throw ManifestMismatch("input branches cover different image sets");

  FusionWeights weights = config.weights;
  if (config.op == FusionOp::Wbf && weights.per_branch.empty())
    for (const auto& b : branches) weights.per_branch[b.branch_id] = 1.0;

  BranchPredictions out;
  out.branch_id = "fused";
  for (const auto& kv : branches[0].per_image) {
    const std::string& id = kv.first;
    // Class partition, classes in sorted order for determinism.
    std::map<std::string, std::vector<std::vector<Detection>>> by_class;
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
      auto it = branches[bi].per_image.find(id);
      if (it == branches[bi].per_image.end())
        throw ManifestMismatch("image missing from branch " + branches[bi].branch_id +
                               ": " + id);
      for (const auto& d : it->second) {
        auto& slots = by_class[d.class_code];
        if (slots.empty()) slots.resize(branches.size());
        slots[bi].push_back(d);
      }
    }
    std::vector<Detection> fused;
    for (auto& [code, slots] : by_class) {
      if (slots.empty()) slots.resize(branches.size());
      switch (config.op) {
        case FusionOp::Nms:
        case FusionOp::SoftNms: {
          std::vector<Detection> pooled;
          for (const auto& s : slots) pooled.insert(pooled.end(), s.begin(), s.end());
          const auto result = config.op == FusionOp::Nms
                                  ? nms(pooled, config.iou_thresh)
                                  : soft_nms(pooled, config.sigma_or_slope,
                                             config.mode, config.score_floor);
          fused.insert(fused.end(), result.begin(), result.end());
          break;
        }
        case FusionOp::Union: {
          const auto result = union_low_threshold(slots[0], slots[1], config.sigma_c,
                                                  config.dedup_iou);
          fused.insert(fused.end(), result.begin(), result.end());
          break;
        }
        case FusionOp::Wbf: {
          std::vector<std::pair<std::string, std::vector<Detection>>> inputs;
          for (std::size_t i = 0; i < branches.size(); ++i)
            inputs.emplace_back(branches[i].branch_id, slots[i]);
          for (const auto& trace :
               wbf(inputs, weights, config.iou_cluster, config.score_floor))
            fused.push_back(trace.fused);
          break;
        }
      }
    }
    out.per_image.emplace(id, std::move(fused));
  }
  return out;
}

}  // namespace edccf
