#include "edccf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <json.hpp>

#include "edccf/rng.hpp"

namespace edccf {

PairedTrialTable subset_trials(const BranchPredictions& baseline,
                               const BranchPredictions& candidate,
                               const GroundTruthSet& gt,
                               const ClassVocabulary& vocab,
                               int n_trials, int subset_size,
                               std::uint64_t base_seed,
                               const std::vector<std::string>& class_ap_metrics) {
  if (n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
  const std::vector<std::string> manifest = image_ids(gt);
  if (subset_size < 1 || static_cast<std::size_t>(subset_size) > manifest.size())
    throw InvalidArgument("subset_size must lie in [1, n_images]");
  for (const auto& code : class_ap_metrics)
    if (!vocab.contains(code)) throw MissingClass("unknown class: " + code);

  PairedTrialTable table;
  table.n_trials = n_trials;
  table.subset_size = subset_size;
  table.metrics.push_back("map50");
  for (const auto& code : class_ap_metrics) table.metrics.push_back("ap50:" + code);

  const auto metric_value = [](const EvalResult& ev, const std::string& metric) {
    if (metric == "map50") return ev.map50;
    const std::string code = metric.substr(5);  // "ap50:<code>"
    auto it = ev.per_class_ap50.find(code);
    return it == ev.per_class_ap50.end() ? 0.0 : it->second;
  };

  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    Rng rng(seed);
    const auto picks = rng.sample_without_replacement(
        manifest.size(), static_cast<std::size_t>(subset_size));
    std::vector<std::string> ids;
    ids.reserve(picks.size());
    for (std::size_t p : picks) ids.push_back(manifest[p]);

    const GroundTruthSet gt_s = restrict_to(gt, ids);
    const EvalResult ev_b = evaluate(restrict_to(baseline, ids), gt_s, vocab);
    const EvalResult ev_c = evaluate(restrict_to(candidate, ids), gt_s, vocab);

    for (const auto& metric : table.metrics) {
      TrialRow row;
      row.trial = t;
      row.seed = seed;
      row.metric = metric;
      row.value_baseline = metric_value(ev_b, metric);
      row.value_candidate = metric_value(ev_c, metric);
      row.delta = row.value_candidate - row.value_baseline;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

// Average ranks over |deltas|; exact-double grouping of ties. Every rank is
// a multiple of 0.5, so rank sums are exact in floating point.
std::vector<double> average_ranks(const std::vector<double>& abs_values) {
  const std::size_t n = abs_values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return abs_values[a] < abs_values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_values[order[j + 1]] == abs_values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Exact null: the number of sign assignments with positive-rank sum >= the
// observed one, counted by subset-sum DP over doubled ranks (integers).
// This enumerates the same 2^n distribution as brute force, in polynomial
// time; p = count / 2^n is a dyadic rational, exact in a double for n <= 25.
double exact_p_ge(const std::vector<double>& ranks, double w_obs) {
  const std::size_t n = ranks.size();
  std::vector<long long> r2(n);
  long long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r2[i] = std::llround(2.0 * ranks[i]);
    total2 += r2[i];
  }
  const long long w2 = std::llround(2.0 * w_obs);
  std::vector<std::uint64_t> dp(static_cast<std::size_t>(total2) + 1, 0);
  dp[0] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (long long s = total2; s >= r2[i]; --s)
      dp[static_cast<std::size_t>(s)] += dp[static_cast<std::size_t>(s - r2[i])];
  std::uint64_t count = 0;
  for (long long s = std::max<long long>(w2, 0); s <= total2; ++s)
    count += dp[static_cast<std::size_t>(s)];
  return static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace

WilcoxonResult wilcoxon_one_sided(const std::vector<double>& deltas) {
  if (deltas.empty()) throw InvalidArgument("at least one delta is required");

  std::vector<double> nz;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw InvalidArgument("deltas must be finite");
    if (d != 0.0) nz.push_back(d);
  }
  WilcoxonResult res;
  if (nz.empty()) {
    res.all_zero = true;
    res.p_raw = 1.0;
    return res;
  }
  const std::size_t n = nz.size();
  res.n_used = static_cast<int>(n);

  std::vector<double> abs_values(n);
  for (std::size_t i = 0; i < n; ++i) abs_values[i] = std::fabs(nz[i]);
  const std::vector<double> ranks = average_ranks(abs_values);

  double w_plus = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (nz[i] > 0) w_plus += ranks[i];
  res.statistic = w_plus;

  if (n <= 25) {
    res.p_raw = exact_p_ge(ranks, w_plus);
  } else {
    // Normal approximation with tie and continuity corrections.
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0;
    std::size_t i = 0;
    std::vector<double> sorted_abs = abs_values;
    std::sort(sorted_abs.begin(), sorted_abs.end());
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && sorted_abs[j + 1] == sorted_abs[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (w_plus - mean - 0.5) / std::sqrt(std::max(var, 1e-12));
    res.p_raw = std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  }
  return res;
}

double bonferroni(double p_raw, int k_comparisons) {
  if (k_comparisons < 1) throw InvalidArgument("k_comparisons must be >= 1");
  if (!(p_raw >= 0 && p_raw <= 1)) throw InvalidArgument("p_raw must lie in [0, 1]");
  return std::min(1.0, static_cast<double>(k_comparisons) * p_raw);
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& deltas,
                                       int n_resamples, std::uint64_t seed,
                                       double level) {
  if (deltas.size() < 2) throw InsufficientData("bootstrap needs at least 2 deltas");
  if (n_resamples < 1) throw InvalidArgument("n_resamples must be >= 1");
  if (!(level > 0 && level < 1)) throw InvalidArgument("level must lie in (0, 1)");

  const std::size_t n = deltas.size();
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(n_resamples));
  for (auto& m : means) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += deltas[rng.below(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  const auto quantile = [&](double q) {
    const double h = q * static_cast<double>(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= means.size()) return means.back();
    const double frac = h - static_cast<double>(lo);
    return means[lo] + frac * (means[lo + 1] - means[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

std::vector<std::vector<std::string>> five_fold(const std::vector<std::string>& manifest,
                                                std::uint64_t seed) {
  if (manifest.size() < 5)
    throw InsufficientData("five-fold split needs at least 5 image ids");
  std::vector<std::string> ids = manifest;
  Rng rng(seed);
  rng.shuffle(ids);
  const std::size_t base = ids.size() / 5;
  const std::size_t rem = ids.size() % 5;
  std::vector<std::vector<std::string>> folds(5);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    const std::size_t take = base + (f < rem ? 1 : 0);
    folds[f].assign(ids.begin() + static_cast<long>(pos),
                    ids.begin() + static_cast<long>(pos + take));
    pos += take;
  }
  return folds;
}

std::map<std::string, TestReport> report(const PairedTrialTable& table,
                                         int k_comparisons, int n_resamples,
                                         std::uint64_t seed, double level) {
  std::map<std::string, TestReport> out;
  for (const auto& metric : table.metrics) {
    std::vector<double> deltas;
    for (const auto& row : table.rows)
      if (row.metric == metric) deltas.push_back(row.delta);
    if (deltas.empty()) continue;

    TestReport rep;
    rep.metric = metric;
    rep.n_trials = static_cast<int>(deltas.size());
    int wins = 0;
    for (double d : deltas) {
      rep.mean_delta += d;
      if (d > 0) ++wins;
    }
    rep.mean_delta /= static_cast<double>(deltas.size());
    rep.win_rate = static_cast<double>(wins) / static_cast<double>(deltas.size());

    const WilcoxonResult w = wilcoxon_one_sided(deltas);
    rep.statistic = w.statistic;
    rep.p_raw = w.p_raw;
    rep.all_zero = w.all_zero;
    rep.p_adjusted = bonferroni(w.p_raw, k_comparisons);
    rep.k_comparisons = k_comparisons;

    const auto ci = bootstrap_ci(deltas, n_resamples, seed, level);
    rep.ci_lo = ci.first;
    rep.ci_hi = ci.second;
    rep.ci_level = level;
    rep.n_resamples = n_resamples;
    out.emplace(metric, std::move(rep));
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const PairedTrialTable& table) {
  std::string out = "trial,seed,metric,value_baseline,value_candidate,delta\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += r.metric;
    out += ',';
    out += fmt_double(r.value_baseline);
    out += ',';
    out += fmt_double(r.value_candidate);
    out += ',';
    out += fmt_double(r.delta);
    out += '\n';
  }
  return out;
}

std::string to_csv(const std::map<std::string, TestReport>& reports) {
  std::string out =
      "metric,n_trials,mean_delta,win_rate,statistic,p_raw,p_adjusted,"
      "k_comparisons,direction,ci_lo,ci_hi,ci_level,n_resamples,all_zero\n";
  for (const auto& [metric, r] : reports) {
    out += metric;
    out += ',';
    out += std::to_string(r.n_trials);
    out += ',';
    out += fmt_double(r.mean_delta);
    out += ',';
    out += fmt_double(r.win_rate);
    out += ',';
    out += fmt_double(r.statistic);
    out += ',';
    out += fmt_double(r.p_raw);
    out += ',';
    out += fmt_double(r.p_adjusted);
    out += ',';
    out += std::to_string(r.k_comparisons);
    out += ',';
    out += r.direction;
    out += ',';
    out += fmt_double(r.ci_lo);
    out += ',';
    out += fmt_double(r.ci_hi);
    out += ',';
    out += fmt_double(r.ci_level);
    out += ',';
    out += std::to_string(r.n_resamples);
    out += ',';
    out += r.all_zero ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string to_json(const std::map<std::string, TestReport>& reports) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [metric, r] : reports) {
    doc[metric] = {{"n_trials", r.n_trials},
                   {"mean_delta", r.mean_delta},
                   {"win_rate", r.win_rate},
                   {"statistic", r.statistic},
                   {"p_raw", r.p_raw},
                   {"p_adjusted", r.p_adjusted},
                   {"k_comparisons", r.k_comparisons},
                   {"direction", r.direction},
                   {"ci", {r.ci_lo, r.ci_hi}},
                   {"ci_level", r.ci_level},
                   {"n_resamples", r.n_resamples},
                   {"all_zero", r.all_zero}};
  }
  return doc.dump(1);
}

}  // namespace edccf
