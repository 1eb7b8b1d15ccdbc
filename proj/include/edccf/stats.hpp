#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "edccf/matching.hpp"
#include "edccf/types.hpp"

namespace edccf {

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value_baseline = 0;
  double value_candidate = 0;
  double delta = 0;  // candidate - baseline
};

struct PairedTrialTable {
  std::vector<TrialRow> rows;
  int n_trials = 0;
  int subset_size = 0;
  std::vector<std::string> metrics;
};

// Paired evaluation over seeded random subsets: trial i draws subset_size
// image ids (seed base_seed + i), evaluates baseline and candidate on the
// identical subset, and records one row per metric. Metrics are always
// "map50" plus "ap50:<code>" for each requested class code; a class absent
// from a subset's truth scores 0 on both sides.
PairedTrialTable subset_trials(const BranchPredictions& baseline,
                               const BranchPredictions& candidate,
                               const GroundTruthSet& gt,
                               const ClassVocabulary& vocab,
                               int n_trials, int subset_size,
                               std::uint64_t base_seed,
                               const std::vector<std::string>& class_ap_metrics = {});

struct WilcoxonResult {
  double statistic = 0;  // W+, the positive-rank sum
  double p_raw = 1;
  int n_used = 0;        // sample size after zero-discard
  bool all_zero = false; // every delta was 0; p pinned at 1
};

// One-sided Wilcoxon signed-rank test, H1: deltas > 0. Zeros are discarded,
// tied |deltas| take average ranks. n <= 25 uses the exact permutation null
// (P(W+ >= observed) over all 2^n sign assignments); larger n uses the
// normal approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_one_sided(const std::vector<double>& deltas);

// Family-wise correction: min(1, k * p_raw).
double bonferroni(double p_raw, int k_comparisons);

// Percentile bootstrap interval for the mean delta, with linearly
// interpolated quantiles. Deterministic for a fixed seed.
std::pair<double, double> bootstrap_ci(const std::vector<double>& deltas,
                                       int n_resamples, std::uint64_t seed,
                                       double level = 0.95);

// Shuffles the manifest with the seed and cuts five contiguous near-equal
// folds (earlier folds take the remainder).
std::vector<std::vector<std::string>> five_fold(const std::vector<std::string>& manifest,
                                                std::uint64_t seed);

struct TestReport {
  std::string metric;
  int n_trials = 0;
  double mean_delta = 0;
  double win_rate = 0;  // strictly positive deltas / n_trials
  double statistic = 0;
  double p_raw = 1;
  double p_adjusted = 1;
  int k_comparisons = 1;
  std::string direction = "greater";
  double ci_lo = 0;
  double ci_hi = 0;
  double ci_level = 0.95;
  int n_resamples = 0;
  bool all_zero = false;
};

// Full per-metric summary of a paired trial table: win rate, mean delta,
// Wilcoxon + Bonferroni, bootstrap CI.
std::map<std::string, TestReport> report(const PairedTrialTable& table,
                                         int k_comparisons = 15,
                                         int n_resamples = 1000,
                                         std::uint64_t seed = 0,
                                         double level = 0.95);

// Deterministic serializations (CSV uses %.17g, round-trip exact).
std::string to_csv(const PairedTrialTable& table);
std::string to_csv(const std::map<std::string, TestReport>& reports);
std::string to_json(const std::map<std::string, TestReport>& reports);

}  // namespace edccf
