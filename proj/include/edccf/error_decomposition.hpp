#pragma once

#include <map>
#include <string>
#include <vector>

#include "edccf/matching.hpp"
#include "edccf/types.hpp"

namespace edccf {

// Counts of missed truths by failure mode:
//   PA  - perception absence: no detector output of any class overlaps the
//         truth at even the permissive IoU floor;
//   WC  - wrong class: a confident cross-class detection covers the truth;
//   CS  - confidence suppression: a same-class detection covers the truth
//         but scores below the operating threshold;
//   LD  - localization drift: same-class, confident, but only loosely
//         overlapping (or consumed by another truth).
struct ErrorBucketCounts {
  long long n_pa = 0;
  long long n_wc = 0;
  long long n_cs = 0;
  long long n_ld = 0;

  long long total() const { return n_pa + n_wc + n_cs + n_ld; }
  bool operator==(const ErrorBucketCounts&) const = default;
};

struct DecompositionThresholds {
  double sigma_op = 0.25;  // operating score threshold
  double iou_tp = 0.50;    // true-positive IoU
  double iou_pa = 0.10;    // absence floor; must be < iou_tp
};

// Buckets every missed truth (per class) after greedy operating-point
// matching. Every vocabulary class gets an entry, zeroed when clean.
std::map<std::string, ErrorBucketCounts> decompose_errors(
    const BranchPredictions& preds, const GroundTruthSet& gt,
    const ClassVocabulary& vocab, const DecompositionThresholds& thresholds = {});

// Fraction of misses that are recoverable in principle (absence or wrong
// class) rather than score/geometry artifacts; 0 when the class is clean.
double hcec(const ErrorBucketCounts& counts, double eps = 1e-9);

// Relative whole-set cost of swapping the global-best branch for the branch
// that is best on one class; clamped at 0.
double bsr(double map_all_global_best, double map_all_class_best, double eps = 1e-9);

struct BranchRoleAudit {
  std::string global_best;                          // argmax mAP50, ties -> first registered
  std::map<std::string, std::string> class_best;    // per class, argmax AP50
  std::map<std::string, double> map_all_by_branch;  // branch -> mAP50
  std::map<std::string, std::map<std::string, double>> ap50_by_branch;
  std::vector<std::string> branch_order;            // registration order
};

// Evaluates every branch once and records who is best overall and per class.
// Branch ids must be unique; ties resolve to the earlier branch.
BranchRoleAudit audit_branches(const std::vector<BranchPredictions>& branches,
                               const GroundTruthSet& gt,
                               const ClassVocabulary& vocab);

enum class DominantMode { PaWc, Pa, Wc, Cs, Ld, Mixed, LowError };

std::string to_string(DominantMode m);

struct ClassReliabilityProfile {
  std::string class_code;
  double ap50 = 0;      // on the global-best branch
  double hcec = 0;
  double bsr = 0;
  ClassVocabulary::Role role = ClassVocabulary::Role::Stable;
  std::string preferred_branch;
  DominantMode dominant_mode = DominantMode::LowError;
};

struct RoleConfig {
  double tau_hard = 0.30;        // hard iff ap50 < tau_hard
  double eps = 1e-9;
  long long low_error_floor = 5; // fewer total misses than this -> LowError
};

// Joins the branch audit with the error buckets into one per-class profile.
std::map<std::string, ClassReliabilityProfile> classify_roles(
    const BranchRoleAudit& audit,
    const std::map<std::string, ErrorBucketCounts>& buckets,
    const RoleConfig& config = {});

}  // namespace edccf
