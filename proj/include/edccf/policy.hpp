#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "edccf/error_decomposition.hpp"
#include "edccf/fusion_ops.hpp"
#include "edccf/matching.hpp"
#include "edccf/types.hpp"

namespace edccf {

enum class ArmKind { KeepGlobal, UnionLowThreshold, ScoreReprojection, LowWeightWbf };

std::string to_string(ArmKind k);

struct PolicyArm {
  ArmKind kind = ArmKind::KeepGlobal;
  double sigma_c = 0.10;  // UnionLowThreshold: low score floor
  double a = 1.0;         // ScoreReprojection slope
  double b = 0.0;         // ScoreReprojection offset
  double w_c = 0.15;      // LowWeightWbf repair weight, always in [0.10, 0.25]
};

struct ArmProvenance {
  ErrorBucketCounts buckets;
  double hcec = 0;
  double bsr = 0;
  std::string note;  // human-readable routing rationale, never empty
};

struct FusionPolicy {
  std::map<std::string, PolicyArm> per_class;
  std::map<std::string, double> tau_c;  // per-class activation threshold audit trail
  std::map<std::string, ArmProvenance> provenance;
};

struct PolicyConfig {
  double tau_hard = 0.30;
  double sigma_c = 0.10;
  double w_c = 0.15;
  double reproj_a = 1.0;
  double reproj_b = 0.0;
  double dedup_iou = 0.55;
  double wbf_iou_cluster = 0.55;
  double wbf_score_floor = 1e-3;
  // A hard class is routed only when BSR > 0 or HCEC > activation_hcec_gate;
  // otherwise there is no evidence another branch can help.
  double activation_hcec_gate = 0.5;
  bool require_activation_gate = true;
  // Default arm order tests PA-vs-CS before WC dominance; flipping this
  // checks the wrong-class arm first (severity-ordered variant).
  bool severity_ordered_arms = false;
};

// Chooses a per-class repair arm from the reliability profiles:
//   stable               -> KeepGlobal
//   hard, N_PA > N_CS    -> UnionLowThreshold(sigma_c)
//   hard, WC strict max  -> ScoreReprojection(a, b)
//   hard, otherwise      -> LowWeightWbf(w_c clamped to [0.10, 0.25])
// Hard classes failing the activation gate, or with all-zero buckets, fall
// back to KeepGlobal with the reason recorded in provenance.
FusionPolicy derive_policy(
    const std::map<std::string, ClassReliabilityProfile>& profiles,
    const std::map<std::string, ErrorBucketCounts>& buckets,
    const PolicyConfig& config = {});

struct FusedOutput {
  BranchPredictions detections;
  FusionPolicy policy;
  std::map<std::string, std::string> source_attribution;  // class -> route description
};

// Executes the policy image by image. Classes under KeepGlobal are copied
// verbatim (bit-identical detections, original order); routed classes are
// rebuilt from the global branch plus their repair branch. Every routed
// class must have a repair branch registered.
FusedOutput apply_policy(const FusionPolicy& policy,
                         const BranchPredictions& global_branch,
                         const std::map<std::string, BranchPredictions>& repair_branches,
                         const ClassVocabulary& vocab,
                         const PolicyConfig& config = {});

struct PreservationReport {
  struct Entry {
    std::string class_code;
    double before = 0;
    double after = 0;
  };
  std::vector<Entry> stable_regressions;  // stable class AP dropped by > tol
  std::vector<Entry> hard_not_improved;   // hard class AP failed to rise

  bool satisfied() const {
    return stable_regressions.empty() && hard_not_improved.empty();
  }
};

// Checks the raise-every-hard-class contract on AP50: hard classes must
// strictly improve, stable classes must not drop by more than tol.
PreservationReport verify_preservation(const EvalResult& before,
                                       const EvalResult& after,
                                       const std::set<std::string>& hard_classes,
                                       double tol = 0.0);

}  // namespace edccf
