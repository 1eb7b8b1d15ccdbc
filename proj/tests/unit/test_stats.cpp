#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>

#include "edccf/rng.hpp"
#include "edccf/stats.hpp"

using namespace edccf;

namespace {

// Independent oracle: brute-force enumeration of every sign assignment, with
// its own average-rank computation. Both routes produce exact dyadic
// rationals, so agreement must be bitwise.
double enumerate_p(const std::vector<double>& deltas) {
  std::vector<double> nz;
  for (double d : deltas)
    if (d != 0.0) nz.push_back(d);
  const std::size_t n = nz.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(nz[j]) < std::fabs(nz[i])) ++below;
      if (std::fabs(nz[j]) == std::fabs(nz[i])) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  double w_obs = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (nz[i] > 0) w_obs += ranks[i];
  std::uint64_t count = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) w += ranks[i];
    if (w >= w_obs) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace

TEST_CASE("signed-rank test frozen values") {
  SUBCASE("three positives") {
    const auto res = wilcoxon_one_sided({1.0, 2.0, 3.0});
    CHECK(res.statistic == 6.0);
    CHECK(res.p_raw == 0.125);  // 1 of 2^3 assignments reaches W+ = 6
    CHECK(res.n_used == 3);
    CHECK(!res.all_zero);
  }
  SUBCASE("one positive one negative with tied magnitudes") {
    const auto res = wilcoxon_one_sided({-1.0, 1.0});
    CHECK(res.statistic == 1.5);  // average rank of the tie
    CHECK(res.p_raw == 0.75);     // 3 of 4 assignments reach 1.5
  }
  SUBCASE("all zeros pin the p-value at one") {
    const auto res = wilcoxon_one_sided({0.0, 0.0, 0.0});
    CHECK(res.all_zero);
    CHECK(res.p_raw == 1.0);
    CHECK(res.n_used == 0);
    CHECK(res.statistic == 0.0);
  }
  SUBCASE("zeros are discarded before ranking") {
    const auto res = wilcoxon_one_sided({0.0, 0.0, 1.0});
    CHECK(res.n_used == 1);
    CHECK(res.p_raw == 0.5);  // W+ = 1; assignments {0, 1}
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(wilcoxon_one_sided({}), InvalidArgument);
    CHECK_THROWS_AS(wilcoxon_one_sided({1.0, std::nan("")}), InvalidArgument);
  }
}

TEST_CASE("signed-rank exact p equals full enumeration") {
  SUBCASE("fixed vectors") {
    const std::vector<std::vector<double>> grid = {
        {1, 2, 3},
        {-1, 1},
        {0.5, -0.25, 2.0, 2.0},
        {1, 1, 1, -1, -1},
        {3, -3, 3, -3, 3, 1},
        {0.1, 0.2, -0.1, 0.3, -0.2, 0.1, 0.4},
        {-5, -4, -3, 2, 1},
        {2, 2, 2, 2, 2, 2, 2, 2},
        {1, -2, 3, -4, 5, -6, 7, -8, 9, -10, 11, 12},
    };
    for (const auto& v : grid)
      CHECK(wilcoxon_one_sided(v).p_raw == enumerate_p(v));
  }
  SUBCASE("random tie-heavy vectors") {
    Rng rng(314159);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 1 + rng.below(12);
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) {
        // Small integer magnitudes force heavy ties; zeros exercise discard.
        const double mag = static_cast<double>(rng.below(4));  // 0..3
        v.push_back(rng.uniform() < 0.5 ? mag : -mag);
      }
      CHECK(wilcoxon_one_sided(v).p_raw == enumerate_p(v));
    }
  }
}

TEST_CASE("signed-rank large-sample path") {
  // 26 distinct magnitudes: above the exact-path cutoff.
  std::vector<double> v;
  const std::set<int> negatives{2, 5, 9, 13, 20};
  for (int i = 0; i < 26; ++i)
    v.push_back(negatives.count(i) ? -(i + 1.0) : i + 1.0);
  const auto res = wilcoxon_one_sided(v);

  // Re-derive the approximation: ranks are the magnitudes themselves.
  double w_plus = 0;
  for (int i = 0; i < 26; ++i)
    if (!negatives.count(i)) w_plus += i + 1.0;
  CHECK(res.statistic == w_plus);
  const double mean = 26.0 * 27.0 / 4.0;
  const double var = 26.0 * 27.0 * 53.0 / 24.0;
  const double z = (w_plus - mean - 0.5) / std::sqrt(var);
  const double expected = 0.5 * std::erfc(z / std::sqrt(2.0));
  CHECK(std::fabs(res.p_raw - expected) < 1e-15);

  SUBCASE("the exact and approximate paths agree near the cutoff") {
    std::vector<double> w;
    for (int i = 0; i < 25; ++i)
      w.push_back(negatives.count(i) ? -(i + 1.0) : i + 1.0);
    const auto exact = wilcoxon_one_sided(w);
    double wp = 0;
    for (int i = 0; i < 25; ++i)
      if (!negatives.count(i)) wp += i + 1.0;
    const double m25 = 25.0 * 26.0 / 4.0;
    const double v25 = 25.0 * 26.0 * 51.0 / 24.0;
    const double z25 = (wp - m25 - 0.5) / std::sqrt(v25);
    const double approx = 0.5 * std::erfc(z25 / std::sqrt(2.0));
    CHECK(std::fabs(exact.p_raw - approx) < 0.01);
  }
}

TEST_CASE("extra positive evidence never weakens the one-sided conclusion") {
  Rng rng(271828);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.below(8);
    // Distinct magnitudes 1..n with random signs: no ties by construction.
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(rng.uniform() < 0.5 ? -(static_cast<double>(i) + 1.0)
                                      : static_cast<double>(i) + 1.0);
    const double p_before = wilcoxon_one_sided(v).p_raw;
    v.push_back(static_cast<double>(n) + 1.0);  // new largest, positive
    const double p_after = wilcoxon_one_sided(v).p_raw;
    CHECK(p_after <= p_before + 1e-15);
  }
}

TEST_CASE("family-wise correction") {
  CHECK(std::fabs(bonferroni(0.001, 15) - 0.015) < 1e-12);
  CHECK(bonferroni(0.2, 15) == 1.0);     // capped
  CHECK(bonferroni(0.3, 1) == 0.3);      // identity at k = 1
  CHECK(bonferroni(0.0, 100) == 0.0);
  CHECK_THROWS_AS(bonferroni(0.1, 0), InvalidArgument);
  CHECK_THROWS_AS(bonferroni(-0.1, 5), InvalidArgument);
  CHECK_THROWS_AS(bonferroni(1.5, 5), InvalidArgument);
}

TEST_CASE("bootstrap interval") {
  SUBCASE("constant deltas collapse the interval exactly") {
    const auto ci = bootstrap_ci({0.25, 0.25, 0.25, 0.25}, 200, 5);
    CHECK(ci.first == 0.25);
    CHECK(ci.second == 0.25);
  }
  SUBCASE("interval is ordered and bounded by the data range") {
    const auto ci = bootstrap_ci({0.0, 1.0}, 500, 42);
    CHECK(ci.first <= ci.second);
    CHECK(ci.first >= 0.0);
    CHECK(ci.second <= 1.0);
  }
  SUBCASE("deterministic for a fixed seed") {
    const std::vector<double> d{0.1, -0.2, 0.3, 0.05, 0.4};
    CHECK(bootstrap_ci(d, 1000, 7) == bootstrap_ci(d, 1000, 7));
  }
  SUBCASE("narrower at lower confidence") {
    const std::vector<double> d{0.1, -0.2, 0.3, 0.05, 0.4, -0.1, 0.2};
    const auto wide = bootstrap_ci(d, 1000, 7, 0.99);
    const auto narrow = bootstrap_ci(d, 1000, 7, 0.50);
    CHECK(narrow.first >= wide.first);
    CHECK(narrow.second <= wide.second);
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(bootstrap_ci({0.5}, 100, 1), InsufficientData);
    CHECK_THROWS_AS(bootstrap_ci({0.5, 0.6}, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(bootstrap_ci({0.5, 0.6}, 100, 1, 1.0), InvalidArgument);
  }
}

namespace {

std::vector<std::string> numbered_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("img_" + std::to_string(i));
  return ids;
}

}  // namespace

TEST_CASE("five-fold manifest split") {
  SUBCASE("600 images cut into five folds of 120") {
    const auto folds = five_fold(numbered_ids(600), 11);
    REQUIRE(folds.size() == 5);
    std::set<std::string> seen;
    for (const auto& f : folds) {
      CHECK(f.size() == 120);
      for (const auto& id : f) CHECK(seen.insert(id).second);  // disjoint
    }
    CHECK(seen.size() == 600);  // exact cover
  }
  SUBCASE("remainders go to the earlier folds") {
    const auto folds = five_fold(numbered_ids(7), 3);
    REQUIRE(folds.size() == 5);
    CHECK(folds[0].size() == 2);
    CHECK(folds[1].size() == 2);
    CHECK(folds[2].size() == 1);
    CHECK(folds[3].size() == 1);
    CHECK(folds[4].size() == 1);
  }
  SUBCASE("ten images give five pairs") {
    for (const auto& f : five_fold(numbered_ids(10), 3)) CHECK(f.size() == 2);
  }
  SUBCASE("five images give singletons") {
    for (const auto& f : five_fold(numbered_ids(5), 3)) CHECK(f.size() == 1);
  }
  SUBCASE("fewer than five is refused") {
    CHECK_THROWS_AS(five_fold(numbered_ids(4), 3), InsufficientData);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(five_fold(numbered_ids(60), 9) == five_fold(numbered_ids(60), 9));
  }
}

namespace {

// Six images, two truths each; the baseline finds one per image, the
// candidate finds both.
struct TrialFixture {
  GroundTruthSet gt;
  BranchPredictions baseline;
  BranchPredictions candidate;
};

TrialFixture make_fixture() {
  TrialFixture f;
  f.baseline.branch_id = "baseline";
  f.candidate.branch_id = "candidate";
  for (int i = 0; i < 6; ++i) {
    const std::string id = "img_" + std::to_string(i);
    const GtInstance t1{"cz", Box{0.1, 0.1, 0.2, 0.2}};
    const GtInstance t2{"cz", Box{0.6, 0.6, 0.2, 0.2}};
    f.gt.per_image[id] = {t1, t2};
    f.baseline.per_image[id] = {Detection{"cz", t1.box, 0.9}};
    f.candidate.per_image[id] = {Detection{"cz", t1.box, 0.9},
                                 Detection{"cz", t2.box, 0.8}};
  }
  // One image carries a truth of a second class found by nobody.
  f.gt.per_image["img_0"].push_back(GtInstance{"kc", Box{0.4, 0.1, 0.15, 0.15}});
  return f;
}

}  // namespace

TEST_CASE("paired subset trials") {
  const auto fx = make_fixture();
  const auto& vocab = ClassVocabulary::road_distress();

  SUBCASE("identical branches give all-zero deltas") {
    const auto table =
        subset_trials(fx.baseline, fx.baseline, fx.gt, vocab, 8, 4, 100, {"cz"});
    CHECK(table.rows.size() == 8 * 2);  // map50 + ap50:cz per trial
    CHECK(table.metrics == std::vector<std::string>{"map50", "ap50:cz"});
    for (const auto& row : table.rows) {
      CHECK(row.delta == 0.0);
      CHECK(row.value_baseline == row.value_candidate);
    }
  }
  SUBCASE("seeds are recorded per trial") {
    const auto table =
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 3, 4, 100);
    CHECK(table.rows[0].seed == 100);
    CHECK(table.rows[1].seed == 101);
    CHECK(table.rows[2].seed == 102);
  }
  SUBCASE("a dominant candidate wins every trial") {
    const auto table =
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 10, 4, 7, {"cz"});
    for (const auto& row : table.rows) CHECK(row.delta > 0.0);
    const auto reports = report(table, 15, 200, 1);
    CHECK(reports.at("map50").win_rate == 1.0);
    CHECK(reports.at("ap50:cz").win_rate == 1.0);
  }
  SUBCASE("a class absent from a subset scores zero on both sides") {
    const auto table =
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 10, 2, 55, {"kc"});
    bool saw_absent = false;
    for (const auto& row : table.rows) {
      if (row.metric != "ap50:kc") continue;
      CHECK(row.value_baseline == 0.0);  // nobody detects kc anywhere
      CHECK(row.value_candidate == 0.0);
      saw_absent = true;
    }
    CHECK(saw_absent);
  }
  SUBCASE("serialization is deterministic") {
    const auto t1 =
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 5, 3, 9, {"cz"});
    const auto t2 =
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 5, 3, 9, {"cz"});
    CHECK(to_csv(t1) == to_csv(t2));
    CHECK(to_csv(t1).rfind("trial,seed,metric,", 0) == 0);
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 0, 4, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 1, 0, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 1, 7, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(
        subset_trials(fx.baseline, fx.candidate, fx.gt, vocab, 1, 4, 1, {"bad"}),
        MissingClass);
  }
}

TEST_CASE("per-metric reporting") {
  PairedTrialTable table;
  table.n_trials = 50;
  table.subset_size = 450;
  table.metrics = {"map50", "ap50:cz"};
  double sum = 0;
  for (int i = 0; i < 50; ++i) {
    TrialRow row;
    row.trial = i;
    row.seed = 1000 + static_cast<std::uint64_t>(i);
    row.metric = "map50";
    // 48 wins of varying size, 2 losses.
    row.delta = i < 48 ? 0.002 * (i + 1) : -0.001 * (i - 46);
    sum += row.delta;
    table.rows.push_back(row);
    TrialRow zero = row;
    zero.metric = "ap50:cz";
    zero.delta = 0.0;
    table.rows.push_back(zero);
  }

  const auto reports = report(table, 15, 300, 2);
  const auto& r = reports.at("map50");
  CHECK(r.n_trials == 50);
  CHECK(r.win_rate == 48.0 / 50.0);
  CHECK(r.win_rate == 0.96);
  CHECK(r.mean_delta == sum / 50.0);
  CHECK(r.p_adjusted == bonferroni(r.p_raw, 15));
  CHECK(r.k_comparisons == 15);
  CHECK(r.direction == "greater");
  CHECK(r.ci_level == 0.95);
  CHECK(r.n_resamples == 300);
  CHECK(r.ci_lo <= r.ci_hi);
  CHECK(!r.all_zero);

  const auto& z = reports.at("ap50:cz");
  CHECK(z.all_zero);
  CHECK(z.p_raw == 1.0);
  CHECK(z.p_adjusted == 1.0);
  CHECK(z.win_rate == 0.0);

  SUBCASE("report serializations are deterministic and parseable") {
    CHECK(to_csv(reports) == to_csv(report(table, 15, 300, 2)));
    CHECK(to_json(reports) == to_json(report(table, 15, 300, 2)));
    CHECK(to_json(reports).find("\"win_rate\"") != std::string::npos);
    CHECK(to_csv(reports).rfind("metric,n_trials,", 0) == 0);
  }
}
