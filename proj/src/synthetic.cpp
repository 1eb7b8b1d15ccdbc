#include "edccf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "edccf/fusion_ops.hpp"
#include "edccf/rng.hpp"

namespace edccf {

std::map<std::string, double> default_class_distribution() {
  // Long-tail instance counts of the eight road-distress categories; exact
  // ratios so the fractions sum to 1 without rounding drift.
  static const std::pair<const char*, double> counts[] = {
      {"zxlf", 1631}, {"hxlf", 1330}, {"lmlj", 1000}, {"jl", 702},
      {"kc", 492},    {"cz", 285},    {"ssf", 256},   {"hbgdf", 47}};
  double total = 0;
  for (const auto& [code, c] : counts) total += c;
  std::map<std::string, double> dist;
  for (const auto& [code, c] : counts) dist[code] = c / total;
  return dist;
}

GroundTruthSet generate_scene(const std::map<std::string, double>& class_distribution,
                              int n_images, const BoxCount& boxes, std::uint64_t seed) {
  if (class_distribution.empty())
    throw InvalidDistribution("class distribution must be non-empty");
  double sum = 0;
  for (const auto& [code, f] : class_distribution) {
    if (!(f >= 0) || !std::isfinite(f))
      throw InvalidDistribution("class fractions must be finite and >= 0");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw InvalidDistribution("class fractions must sum to 1");
  if (n_images < 1) throw InvalidArgument("n_images must be >= 1");
  if (boxes.min_boxes < 1 || boxes.max_boxes < boxes.min_boxes)
    throw InvalidArgument("need 1 <= min_boxes <= max_boxes");

  // CDF in map (sorted-code) order.
  std::vector<std::pair<std::string, double>> cdf;
  double acc = 0;
  for (const auto& [code, f] : class_distribution) {
    acc += f;
    cdf.emplace_back(code, acc);
  }
  cdf.back().second = 1.0;

  Rng rng(seed);
  GroundTruthSet gt;
  for (int i = 0; i < n_images; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "img_%06d", i);
    const int count = boxes.min_boxes +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(
                          boxes.max_boxes - boxes.min_boxes + 1)));
    std::vector<GtInstance> instances;
    instances.reserve(static_cast<std::size_t>(count));
    for (int b = 0; b < count; ++b) {
      const double u = rng.uniform();
      std::string code = cdf.back().first;
      for (const auto& [c, edge] : cdf)
        if (u < edge) {
          code = c;
          break;
        }
      const double w = rng.uniform(0.05, 0.20);
      const double h = rng.uniform(0.05, 0.20);
      const double x = rng.uniform(0.0, 1.0 - w);
      const double y = rng.uniform(0.0, 1.0 - h);
      instances.push_back(GtInstance{code, Box{x, y, w, h}});
    }
    gt.per_image.emplace(id, std::move(instances));
  }
  return gt;
}

namespace {

double clamp_score(double s) { return std::clamp(s, 1e-3, 0.999); }

Box jittered(const Box& b, double jitter, Rng& rng) {
  if (jitter <= 0) return b;
  Box out;
  out.x = std::max(0.0, b.x + rng.gaussian(0.0, jitter * b.w));
  out.y = std::max(0.0, b.y + rng.gaussian(0.0, jitter * b.h));
  out.w = std::max(0.2 * b.w, b.w * (1.0 + rng.gaussian(0.0, jitter)));
  out.h = std::max(0.2 * b.h, b.h * (1.0 + rng.gaussian(0.0, jitter)));
  return out;
}

}  // namespace

BranchPredictions simulate_branch(const GroundTruthSet& gt,
                                  const ClassVocabulary& vocab,
                                  const BranchProfile& profile, std::uint64_t seed) {
  for (const auto& m : {&profile.recall, &profile.precision})
    for (const auto& [code, v] : *m) {
      if (!vocab.contains(code)) throw MissingClass("unknown class in profile: " + code);
      if (!(v >= 0 && v <= 1)) throw InvalidArgument("profile rates must lie in [0, 1]");
    }

  Rng rng(seed);
  BranchPredictions out;
  out.branch_id = profile.branch_id;
  std::vector<std::string> ids;
  ids.reserve(gt.per_image.size());
  std::map<std::string, long long> tp_count;

  for (const auto& [id, truths] : gt.per_image) {
    ids.push_back(id);
    std::vector<Detection> dets;
    for (const auto& t : truths) {
      const double rho = profile.recall_for(t.class_code);
      if (rng.uniform() >= rho) continue;
      const double pi = profile.precision_for(t.class_code);
      const Box box = jittered(t.box, profile.jitter, rng);
      const double mean =
          profile.order_preserving ? 0.6 + 0.3 * pi : 0.6;
      double score = clamp_score(rng.gaussian(mean, profile.score_noise));
      if (profile.suppressed_score_frac > 0 &&
          rng.uniform() < profile.suppressed_score_frac)
        score = rng.uniform(0.02, 0.2);  // pushes the hit under the operating point
      dets.push_back(Detection{t.class_code, box, score});
      ++tp_count[t.class_code];
    }
    out.per_image.emplace(id, std::move(dets));
  }

  // False positives per class, volume set by the target precision
  // t/(t+f) ~= pi, placed away from same-class truths.
  for (const auto& code : vocab.codes()) {
    const double pi_raw = profile.precision_for(code);
    if (pi_raw >= 1.0) continue;
    const double pi = std::max(pi_raw, 0.05);
    const double expected = static_cast<double>(tp_count[code]) * (1.0 - pi) / pi;
    long long n_fp = static_cast<long long>(expected);
    if (rng.uniform() < expected - static_cast<double>(n_fp)) ++n_fp;

    for (long long f = 0; f < n_fp; ++f) {
      const std::string& img = ids[rng.below(ids.size())];
      const auto& truths = gt.per_image.at(img);
      Box box;
      for (int attempt = 0; attempt < 50; ++attempt) {
        const double w = rng.uniform(0.05, 0.20);
        const double h = rng.uniform(0.05, 0.20);
        box = Box{rng.uniform(0.0, 1.0 - w), rng.uniform(0.0, 1.0 - h), w, h};
        bool clear = true;
        for (const auto& t : truths)
          if (t.class_code == code && iou(box, t.box) > 0.1) {
            clear = false;
            break;
          }
        if (clear) break;  // best effort after the attempt budget
      }
      const double mean =
          profile.order_preserving ? 0.6 - 0.3 * pi_raw : 0.6;
      const double score = clamp_score(rng.gaussian(mean, profile.score_noise));
      out.per_image.at(img).push_back(Detection{code, box, score});
    }
  }
  return out;
}

DominanceResult dominance_experiment(
    const GroundTruthSet& gt,
    const std::vector<std::pair<BranchPredictions, BranchProfile>>& branches,
    const std::string& hard_class, const ClassVocabulary& vocab,
    double iou_cluster) {
  if (branches.size() < 2)
    throw InvalidArgument("dominance experiment needs at least two branches");

  std::vector<double> pis;
  for (const auto& [preds, prof] : branches)
    pis.push_back(prof.precision_for(hard_class));
  const bool all_equal =
      std::all_of(pis.begin(), pis.end(), [&](double p) { return p == pis[0]; });

  DominanceResult res;
  if (all_equal) {
    res.precision_variance = 0.0;
  } else {
    double mu = 0;
    for (double p : pis) mu += p;
    mu /= static_cast<double>(pis.size());
    for (double p : pis) res.precision_variance += (p - mu) * (p - mu);
    res.precision_variance /= static_cast<double>(pis.size());
  }

  FusionWeights uniform, weighted;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    uniform.per_branch[branches[i].first.branch_id] = 1.0;
    weighted.per_branch[branches[i].first.branch_id] = pis[i];
  }
  // Equal precisions make the two weightings mathematically identical; use
  // the same map so the fusions are bit-identical and the delta is exactly 0.
  if (all_equal) weighted = uniform;

  const auto fuse_with = [&](const FusionWeights& w) {
    BranchPredictions fused;
    fused.branch_id = "fused";
    for (const auto& [id, truths] : gt.per_image) {
      std::vector<std::pair<std::string, std::vector<Detection>>> inputs;
      for (const auto& [preds, prof] : branches) {
        auto it = preds.per_image.find(id);
        if (it == preds.per_image.end())
          throw ManifestMismatch("branch " + preds.branch_id + " is missing image " + id);
        std::vector<Detection> hard;
        for (const auto& d : it->second)
          if (d.class_code == hard_class) hard.push_back(d);
        inputs.emplace_back(preds.branch_id, std::move(hard));
      }
      std::vector<Detection> fused_dets;
      for (const auto& trace : wbf(inputs, w, iou_cluster))
        fused_dets.push_back(trace.fused);
      fused.per_image.emplace(id, std::move(fused_dets));
    }
    return fused;
  };

  const auto hard_ap = [&](const BranchPredictions& preds) {
    const EvalResult ev = evaluate(preds, gt, vocab);
    auto it = ev.per_class_ap50.find(hard_class);
    if (it == ev.per_class_ap50.end())
      throw MissingClass("scene has no truth of class " + hard_class);
    return it->second;
  };

  res.ap_uniform = hard_ap(fuse_with(uniform));
  res.ap_class_weighted = hard_ap(fuse_with(weighted));
  res.strict_gain = res.ap_class_weighted > res.ap_uniform;

  // A truth covered only by above-minimum-precision branches means the
  // class-weighted fusion is adding recall, not just rescoring.
  const double min_pi = *std::min_element(pis.begin(), pis.end());
  for (const auto& [id, truths] : gt.per_image) {
    for (const auto& t : truths) {
      if (t.class_code != hard_class) continue;
      bool covered_any = false;
      bool covered_by_min = false;
      for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& dets = branches[i].first.per_image.at(id);
        for (const auto& d : dets) {
          if (d.class_code != hard_class || iou(d.box, t.box) < 0.5) continue;
          covered_any = true;
          if (pis[i] == min_pi) covered_by_min = true;
          break;
        }
      }
      if (covered_any && !covered_by_min && !all_equal) {
        res.added_recall = true;
        break;
      }
    }
    if (res.added_recall) break;
  }

  res.calibration_order_preserved =
      std::all_of(branches.begin(), branches.end(),
                  [](const auto& b) { return b.second.order_preserving; });
  return res;
}

ScenarioBundle hcrp_end_to_end(std::uint64_t seed, const ScenarioConfig& config) {
  const ClassVocabulary& vocab = ClassVocabulary::road_distress();
  if (!vocab.contains(config.hard_class))
    throw MissingClass("unknown hard class: " + config.hard_class);

  ScenarioBundle bundle;
  bundle.gt = generate_scene(default_class_distribution(), config.n_images,
                             config.boxes, seed);

  BranchProfile global_prof;
  global_prof.branch_id = "global";
  global_prof.default_recall = 0.88;
  global_prof.default_precision = 0.85;
  global_prof.recall[config.hard_class] = 0.25;
  global_prof.precision[config.hard_class] = 0.60;
  global_prof.jitter = 0.03;
  global_prof.score_noise = 0.08;

  BranchProfile spec_prof;
  spec_prof.branch_id = "specialist";
  spec_prof.default_recall = 0.0;
  spec_prof.default_precision = 1.0;
  spec_prof.recall[config.hard_class] = 0.85;
  spec_prof.precision[config.hard_class] = 0.92;
  spec_prof.jitter = 0.03;
  spec_prof.score_noise = 0.08;

  bundle.global_branch = simulate_branch(bundle.gt, vocab, global_prof, seed + 1);
  bundle.specialist_branch = simulate_branch(bundle.gt, vocab, spec_prof, seed + 2);

  bundle.buckets = decompose_errors(bundle.global_branch, bundle.gt, vocab);
  bundle.audit =
      audit_branches({bundle.global_branch, bundle.specialist_branch}, bundle.gt, vocab);
  RoleConfig role_config;
  role_config.tau_hard = config.policy.tau_hard;
  bundle.profiles = classify_roles(bundle.audit, bundle.buckets, role_config);

  bundle.policy = derive_policy(bundle.profiles, bundle.buckets, config.policy);
  bundle.fused = apply_policy(bundle.policy, bundle.global_branch,
                              {{config.hard_class, bundle.specialist_branch}}, vocab,
                              config.policy);

  bundle.eval_before = evaluate(bundle.global_branch, bundle.gt, vocab);
  bundle.eval_after = evaluate(bundle.fused.detections, bundle.gt, vocab);

  for (const auto& [code, prof] : bundle.profiles)
    if (prof.role == ClassVocabulary::Role::Hard) bundle.hard_classes.insert(code);
  bundle.preservation = verify_preservation(bundle.eval_before, bundle.eval_after,
                                            bundle.hard_classes, 0.0);

  if (config.n_trials > 0) {
    bundle.trials = subset_trials(bundle.global_branch, bundle.fused.detections,
                                  bundle.gt, vocab, config.n_trials,
                                  config.subset_size, seed + 1000,
                                  {config.hard_class});
    bundle.reports = report(bundle.trials, config.k_comparisons, config.n_resamples,
                            seed + 2000);
  }
  return bundle;
}

namespace {

// Everything below is the reference path: same conventions as the
// production evaluator, written as plain quadratic scans.
double ov(const Box& a, const Box& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return 0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

struct NaiveRecord {
  double score;
  bool matched;
};

std::vector<NaiveRecord> naive_match_image(const std::vector<Detection>& dets,
                                           const std::vector<Box>& gts,
                                           double thresh) {
  std::vector<bool> det_done(dets.size(), false);
  std::vector<bool> gt_done(gts.size(), false);
  std::vector<NaiveRecord> recs;
  for (std::size_t round = 0; round < dets.size(); ++round) {
    // Highest-score unprocessed detection, earliest index on ties.
    int pick = -1;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (det_done[i]) continue;
      if (pick < 0 || dets[i].score > dets[static_cast<std::size_t>(pick)].score)
        pick = static_cast<int>(i);
    }
    det_done[static_cast<std::size_t>(pick)] = true;
    int best_gt = -1;
    double best_iou = 0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gt_done[j]) continue;
      const double v = ov(dets[static_cast<std::size_t>(pick)].box, gts[j]);
      if (v >= thresh && v > best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(j);
      }
    }
    if (best_gt >= 0) gt_done[static_cast<std::size_t>(best_gt)] = true;
    recs.push_back(NaiveRecord{dets[static_cast<std::size_t>(pick)].score, best_gt >= 0});
  }
  return recs;
}

double naive_ap(const std::vector<NaiveRecord>& pooled, std::size_t n_gt) {
  if (n_gt == 0) return 0;
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pooled[a].score != pooled[b].score) return pooled[a].score > pooled[b].score;
    return a < b;  // pool position keeps ties stable
  });
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pooled[order[i]].matched) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  double sum = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (recall[i] >= r && precision[i] > best) best = precision[i];
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace

EvalResult naive_evaluate(const BranchPredictions& preds, const GroundTruthSet& gt,
                          const ClassVocabulary& vocab) {
  if (preds.per_image.size() != gt.per_image.size())
    throw ManifestMismatch("prediction and truth image sets differ in size");
  for (const auto& [id, boxes] : gt.per_image)
    if (!preds.per_image.count(id))
      throw ManifestMismatch("image missing from predictions: " + id);

  EvalResult out;
  out.n_images = gt.per_image.size();
  for (const auto& code : vocab.codes()) {
    std::size_t n_gt = 0;
    for (const auto& [id, boxes] : gt.per_image)
      for (const auto& g : boxes)
        if (g.class_code == code) ++n_gt;
    if (n_gt == 0) continue;

    double ap_sum = 0;
    double ap50 = 0;
    for (int t = 0; t < 10; ++t) {
      const double thresh = 0.5 + 0.05 * t;
      std::vector<NaiveRecord> pooled;
      for (const auto& [id, boxes] : gt.per_image) {
        std::vector<Detection> dets;
        for (const auto& d : preds.per_image.at(id))
          if (d.class_code == code) dets.push_back(d);
        std::vector<Box> gts;
        for (const auto& g : boxes)
          if (g.class_code == code) gts.push_back(g.box);
        for (const auto& r : naive_match_image(dets, gts, thresh)) pooled.push_back(r);
      }
      const double ap = naive_ap(pooled, n_gt);
      if (t == 0) ap50 = ap;
      ap_sum += ap;
    }
    out.per_class_ap50[code] = ap50;
    out.per_class_ap5095[code] = ap_sum / 10.0;
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
