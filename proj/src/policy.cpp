#include "edccf/policy.hpp"

#include <algorithm>

namespace edccf {

std::string to_string(ArmKind k) {
  switch (k) {
    case ArmKind::KeepGlobal: return "keep-global";
    case ArmKind::UnionLowThreshold: return "union-low-threshold";
    case ArmKind::ScoreReprojection: return "score-reprojection";
    case ArmKind::LowWeightWbf: return "low-weight-wbf";
  }
  return "?";
}

namespace {

double clamp_repair_weight(double w) { return std::clamp(w, 0.10, 0.25); }

bool wc_strict_max(const ErrorBucketCounts& c) {
  return c.n_wc > c.n_pa && c.n_wc > c.n_cs && c.n_wc > c.n_ld;
}

}  // namespace

FusionPolicy derive_policy(
    const std::map<std::string, ClassReliabilityProfile>& profiles,
    const std::map<std::string, ErrorBucketCounts>& buckets,
    const PolicyConfig& config) {
  if (!(config.sigma_c >= 0 && config.sigma_c < 1))
    throw InvalidThresholds("sigma_c must lie in [0, 1)");

  FusionPolicy policy;
  for (const auto& [code, prof] : profiles) {
    auto bit = buckets.find(code);
    if (bit == buckets.end())
      throw MissingClass("no error buckets for class: " + code);
    const ErrorBucketCounts& bc = bit->second;

    ArmProvenance prov;
    prov.buckets = bc;
    prov.hcec = prof.hcec;
    prov.bsr = prof.bsr;
    policy.tau_c[code] = config.tau_hard;

    PolicyArm arm;  // defaults to KeepGlobal
    if (prof.role == ClassVocabulary::Role::Stable) {
      prov.note = "stable class; keeping the global source";
    } else if (config.require_activation_gate &&
               !(prof.bsr > 0 || prof.hcec > config.activation_hcec_gate)) {
      prov.note =
          "hard class but no activation evidence (BSR = 0 and HCEC below gate); "
          "keeping the global source";
    } else if (bc.total() == 0) {
      prov.note = "hard class with empty error buckets; nothing to route on";
    } else {
      const bool absence_first = !config.severity_ordered_arms;
      const bool pa_over_cs = bc.n_pa > bc.n_cs;
      const bool wc_dominates = wc_strict_max(bc);
      if (absence_first ? pa_over_cs : (!wc_dominates && pa_over_cs)) {
        arm.kind = ArmKind::UnionLowThreshold;
        arm.sigma_c = config.sigma_c;
        prov.note = "absence-dominated (N_PA > N_CS); union at a low score floor";
      } else if (wc_dominates) {
        arm.kind = ArmKind::ScoreReprojection;
        arm.a = config.reproj_a;
        arm.b = config.reproj_b;
        prov.note = "wrong-class dominated; class-restricted score re-projection";
      } else {
        arm.kind = ArmKind::LowWeightWbf;
        arm.w_c = clamp_repair_weight(config.w_c);
        prov.note = "mixed failure modes; conservative low-weight fusion";
      }
    }
    policy.per_class[code] = arm;
    policy.provenance[code] = std::move(prov);
  }
  return policy;
}

namespace {

void validate_fused(const std::vector<Detection>& dets, const std::string& image_id) {
  for (const auto& d : dets) {
    if (!d.box.valid() || !std::isfinite(d.score) || d.score < 0 || d.score > 1)
      throw SchemaError("fusion produced an invalid detection on image " + image_id);
  }
}

}  // namespace

FusedOutput apply_policy(const FusionPolicy& policy,
                         const BranchPredictions& global_branch,
                         const std::map<std::string, BranchPredictions>& repair_branches,
                         const ClassVocabulary& vocab,
                         const PolicyConfig& config) {
  // Routed classes need their repair branch up front, not mid-image.
  for (const auto& [code, arm] : policy.per_class) {
    if (!vocab.contains(code)) throw MissingClass("policy class not in vocabulary: " + code);
    if (arm.kind == ArmKind::KeepGlobal) continue;
    auto rit = repair_branches.find(code);
    if (rit == repair_branches.end())
      throw MissingRepairBranch("no repair branch registered for class: " + code);
    if (rit->second.per_image.size() != global_branch.per_image.size())
      throw ManifestMismatch("repair branch for " + code +
                             " covers a different image set than the global branch");
  }

  FusedOutput out;
  out.policy = policy;
  out.detections.branch_id = "edccf";

  const std::vector<Detection> kEmpty;
  for (const auto& [id, gdets] : global_branch.per_image) {
    std::vector<Detection> fused;
    fused.reserve(gdets.size());

    // Pass-through classes first, in their original interleaved order; an
    // all-KeepGlobal policy therefore reproduces the input bit-for-bit.
    for (const auto& d : gdets) {
      auto ait = policy.per_class.find(d.class_code);
      if (ait == policy.per_class.end() || ait->second.kind == ArmKind::KeepGlobal)
        fused.push_back(d);
    }

    for (const auto& code : vocab.codes()) {
      auto ait = policy.per_class.find(code);
      if (ait == policy.per_class.end() || ait->second.kind == ArmKind::KeepGlobal)
        continue;
      const PolicyArm& arm = ait->second;

      std::vector<Detection> gclass;
      for (const auto& d : gdets)
        if (d.class_code == code) gclass.push_back(d);

      const BranchPredictions& repair = repair_branches.at(code);
      auto rit = repair.per_image.find(id);
      if (rit == repair.per_image.end())
        throw ManifestMismatch("repair branch for " + code + " is missing image " + id);
      std::vector<Detection> rclass;
      for (const auto& d : rit->second)
        if (d.class_code == code) rclass.push_back(d);

      std::vector<Detection> routed;
      switch (arm.kind) {
        case ArmKind::UnionLowThreshold:
          routed = union_low_threshold(gclass, rclass, arm.sigma_c, config.dedup_iou);
          break;
        case ArmKind::ScoreReprojection:
          // Re-ranks the global branch's boxes; the repair branch only
          // licenses the arm.
          routed = score_reprojection(std::move(gclass), code, arm.a, arm.b);
          break;
        case ArmKind::LowWeightWbf: {
          FusionWeights w;
          w.per_branch["global"] = 1.0 - arm.w_c;
          w.per_branch["repair"] = arm.w_c;
          for (const auto& trace :
               wbf({{"global", gclass}, {"repair", rclass}}, w,
                   config.wbf_iou_cluster, config.wbf_score_floor))
            routed.push_back(trace.fused);
          break;
        }
        case ArmKind::KeepGlobal:
          break;  // unreachable
      }
      validate_fused(routed, id);
      fused.insert(fused.end(), routed.begin(), routed.end());
    }
    out.detections.per_image.emplace(id, std::move(fused));
  }

  for (const auto& [code, arm] : policy.per_class) {
    switch (arm.kind) {
      case ArmKind::KeepGlobal:
        out.source_attribution[code] = "global";
        break;
      case ArmKind::UnionLowThreshold:
        out.source_attribution[code] = "union(global, repair)";
        break;
      case ArmKind::ScoreReprojection:
        out.source_attribution[code] = "global, re-projected scores";
        break;
      case ArmKind::LowWeightWbf:
        out.source_attribution[code] = "wbf(global, repair)";
        break;
    }
  }
  return out;
}

PreservationReport verify_preservation(const EvalResult& before,
                                       const EvalResult& after,
                                       const std::set<std::string>& hard_classes,
                                       double tol) {
  if (!(tol >= 0)) throw InvalidThresholds("tolerance must be >= 0");
  PreservationReport rep;
  for (const auto& [code, ap_before] : before.per_class_ap50) {
    auto it = after.per_class_ap50.find(code);
    const double ap_after = it == after.per_class_ap50.end() ? 0.0 : it->second;
    if (hard_classes.count(code)) {
      if (!(ap_after > ap_before))
        rep.hard_not_improved.push_back({code, ap_before, ap_after});
    } else if (ap_after < ap_before - tol) {
      rep.stable_regressions.push_back({code, ap_before, ap_after});
    }
  }
  return rep;
}

}  // namespace edccf
