#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edccf/fusion_ops.hpp"
#include "edccf/matching.hpp"
#include "edccf/rng.hpp"

using namespace edccf;

namespace {

Detection det(double x, double y, double w, double h, double score,
              const std::string& code = "cz") {
  return Detection{code, Box{x, y, w, h}, score};
}

// Straight-line re-statement of greedy suppression used as an oracle.
std::vector<Detection> oracle_nms(std::vector<Detection> dets, double thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    bool blocked = false;
    for (const auto& k : kept)
      if (iou(k.box, d.box) >= thresh) blocked = true;
    if (!blocked) kept.push_back(d);
  }
  return kept;
}

}  // namespace

TEST_CASE("greedy suppression basics") {
  SUBCASE("overlapping pair keeps the stronger box") {
    const auto kept =
        nms({det(0, 0, 2, 1, 0.9), det(0.5, 0, 2, 1, 0.5)}, 0.5);  // IoU = 0.6
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);
  }
  SUBCASE("disjoint boxes both survive") {
    const auto kept = nms({det(0, 0, 1, 1, 0.9), det(5, 5, 1, 1, 0.5)}, 0.5);
    CHECK(kept.size() == 2);
  }
  SUBCASE("suppression boundary is inclusive") {
    // IoU of these two is exactly 0.6 (inter 1.5, union 2.5).
    const std::vector<Detection> pair{det(0, 0, 2, 1, 0.9), det(0.5, 0, 2, 1, 0.5)};
    CHECK(nms(pair, 0.6).size() == 1);   // IoU == threshold suppresses
    CHECK(nms(pair, 0.61).size() == 2);  // just above survives
  }
  SUBCASE("three-box chain equals the oracle") {
    // Pairwise IoUs roughly (0.6, 0.6, 0.1): middle box bridges the outer two.
    const std::vector<Detection> chain{det(0, 0, 2, 1, 0.9), det(0.5, 0, 2, 1, 0.8),
                                       det(1.0, 0, 2, 1, 0.7)};
    CHECK(nms(chain, 0.5) == oracle_nms(chain, 0.5));
    REQUIRE(nms(chain, 0.5).size() == 2);  // outer boxes survive
    CHECK(nms(chain, 0.5)[1].score == 0.7);
  }
  SUBCASE("idempotent") {
    Rng rng(909090);
    for (int t = 0; t < 20; ++t) {
      std::vector<Detection> dets;
      const std::size_t n = rng.below(7);
      for (std::size_t i = 0; i < n; ++i)
        dets.push_back(det(rng.uniform(0, 0.5), rng.uniform(0, 0.5),
                           rng.uniform(0.2, 0.5), rng.uniform(0.2, 0.5),
                           rng.uniform(0.05, 0.99)));
      const auto once = nms(dets, 0.5);
      const auto twice = nms(once, 0.5);
      CHECK(once == twice);
    }
  }
  SUBCASE("matches the oracle on random instances") {
    Rng rng(909091);
    for (int t = 0; t < 100; ++t) {
      std::vector<Detection> dets;
      const std::size_t n = rng.below(7);
      for (std::size_t i = 0; i < n; ++i)
        dets.push_back(det(rng.uniform(0, 0.5), rng.uniform(0, 0.5),
                           rng.uniform(0.2, 0.5), rng.uniform(0.2, 0.5),
                           rng.uniform(0.05, 0.99)));
      CHECK(nms(dets, 0.45) == oracle_nms(dets, 0.45));
    }
  }
  SUBCASE("invalid threshold") {
    CHECK_THROWS_AS(nms({}, 0.0), InvalidThresholds);
    CHECK_THROWS_AS(nms({}, 1.0), InvalidThresholds);
  }
  SUBCASE("mixed classes are rejected") {
    CHECK_THROWS_AS(nms({det(0, 0, 1, 1, 0.9, "cz"), det(0, 0, 1, 1, 0.8, "jl")},
                        0.5),
                    InvalidArgument);
  }
}

TEST_CASE("soft suppression decays instead of deleting") {
  // IoU of the pair is exactly 0.6 (inter 1.5, union 2.5).
  const std::vector<Detection> pair{det(0, 0, 2, 1, 0.9), det(0.5, 0, 2, 1, 0.5)};
  SUBCASE("linear decay at slope 1 leaves 0.5 * (1 - 0.6) = 0.2") {
    const auto out = soft_nms(pair, 1.0, SoftNmsMode::Linear);
    REQUIRE(out.size() == 2);
    CHECK(out[0].score == 0.9);
    CHECK(std::fabs(out[1].score - 0.2) <= 1e-12);
  }
  SUBCASE("gaussian decay matches exp(-iou^2 / sigma)") {
    const auto out = soft_nms(pair, 0.5, SoftNmsMode::Gaussian);
    REQUIRE(out.size() == 2);
    CHECK(std::fabs(out[1].score - 0.5 * std::exp(-0.36 / 0.5)) <= 1e-12);
  }
  SUBCASE("slope zero is the identity on scores") {
    const auto out = soft_nms(pair, 0.0, SoftNmsMode::Linear);
    REQUIRE(out.size() == 2);
    CHECK(out[0].score == 0.9);
    CHECK(out[1].score == 0.5);
  }
  SUBCASE("identical boxes collapse the weaker below the floor") {
    const auto out =
        soft_nms({det(0, 0, 1, 1, 0.9), det(0, 0, 1, 1, 0.5)}, 1.0,
                 SoftNmsMode::Linear);
    REQUIRE(out.size() == 1);  // 0.5 * (1 - 1) = 0 < floor
    CHECK(out[0].score == 0.9);
  }
  SUBCASE("boxes are never moved") {
    const auto out = soft_nms(pair, 1.0, SoftNmsMode::Linear);
    CHECK(out[0].box == pair[0].box);
    CHECK(out[1].box == pair[1].box);
  }
  SUBCASE("negative parameter is rejected") {
    CHECK_THROWS_AS(soft_nms(pair, -0.1, SoftNmsMode::Linear), InvalidThresholds);
    CHECK_THROWS_AS(soft_nms(pair, 0.0, SoftNmsMode::Gaussian), InvalidThresholds);
  }
}

TEST_CASE("weighted box fusion") {
  SUBCASE("two identical boxes at equal weight average the scores") {
    FusionWeights w;
    w.per_branch = {{"g", 1.0}, {"r", 1.0}};
    const std::vector<std::pair<std::string, std::vector<Detection>>> branches{
        {"g", {det(0.1, 0.1, 0.3, 0.3, 0.8)}},
        {"r", {det(0.1, 0.1, 0.3, 0.3, 0.6)}}};
    const auto traces = wbf(branches, w, 0.5);
    REQUIRE(traces.size() == 1);
    CHECK(std::fabs(traces[0].fused.score - 0.7) <= 1e-12);
    CHECK(traces[0].fused.box == Box{0.1, 0.1, 0.3, 0.3});
    CHECK(traces[0].members.size() == 2);
  }
  SUBCASE("single branch single box passes through unchanged") {
    FusionWeights w;
    w.per_branch = {{"g", 1.0}};
    const auto traces = wbf({{"g", {det(0.2, 0.2, 0.4, 0.4, 0.77)}}}, w, 0.5);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].fused.score == 0.77);
    CHECK(traces[0].fused.box == Box{0.2, 0.2, 0.4, 0.4});
  }
  SUBCASE("a box found by one of two branches is halved") {
    FusionWeights w;
    w.per_branch = {{"g", 1.0}, {"r", 1.0}};
    const auto traces =
        wbf({{"g", {det(0.1, 0.1, 0.3, 0.3, 0.8)}}, {"r", {}}}, w, 0.5);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].fused.score == 0.8 * 0.5);  // exact: 0.4
  }
  SUBCASE("weighted coordinates follow the score-weight average") {
    FusionWeights w;
    w.per_branch = {{"g", 3.0}, {"r", 1.0}};
    const std::vector<std::pair<std::string, std::vector<Detection>>> branches{
        {"g", {det(0.0, 0.0, 0.4, 0.4, 0.5)}},
        {"r", {det(0.2, 0.0, 0.4, 0.4, 0.5)}}};
    const auto traces = wbf(branches, w, 0.3);
    REQUIRE(traces.size() == 1);
    // x = (3*0.5*0.0 + 1*0.5*0.2) / (3*0.5 + 1*0.5) = 0.05
    CHECK(std::fabs(traces[0].fused.box.x - 0.05) <= 1e-12);
  }
  SUBCASE("fused box stays inside the member hull") {
    Rng rng(424242);
    FusionWeights w;
    w.per_branch = {{"g", 1.0}, {"r", 0.6}};
    for (int t = 0; t < 40; ++t) {
      const auto base = det(rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4),
                            rng.uniform(0.2, 0.4), rng.uniform(0.2, 0.4),
                            rng.uniform(0.3, 0.9));
      auto shifted = base;
      shifted.box.x += rng.uniform(0, 0.05);
      shifted.box.y += rng.uniform(0, 0.05);
      shifted.score = rng.uniform(0.3, 0.9);
      const auto traces =
          wbf({{"g", {base}}, {"r", {shifted}}}, w, 0.3);
      for (const auto& tr : traces) {
        const double lo_x = std::min(base.box.x, shifted.box.x);
        const double hi_x2 = std::max(base.box.x2(), shifted.box.x2());
        CHECK(tr.fused.box.x >= lo_x - 1e-12);
        CHECK(tr.fused.box.x2() <= hi_x2 + 1e-12);
      }
    }
  }
  SUBCASE("weights must cover every branch and be usable") {
    FusionWeights missing;
    missing.per_branch = {{"g", 1.0}};
    CHECK_THROWS_AS(wbf({{"g", {}}, {"r", {}}}, missing, 0.5), InvalidArgument);
    FusionWeights negative;
    negative.per_branch = {{"g", 1.0}, {"r", -0.5}};
    CHECK_THROWS_AS(wbf({{"g", {}}, {"r", {}}}, negative, 0.5), InvalidArgument);
    FusionWeights zeros;
    zeros.per_branch = {{"g", 0.0}, {"r", 0.0}};
    CHECK_THROWS_AS(zeros.normalized(), InvalidArgument);
  }
  SUBCASE("zero-weight member joins the cluster without moving it") {
    FusionWeights w;
    w.per_branch = {{"g", 1.0}, {"r", 0.0}};
    const std::vector<std::pair<std::string, std::vector<Detection>>> branches{
        {"g", {det(0.1, 0.1, 0.3, 0.3, 0.8)}},
        {"r", {det(0.15, 0.1, 0.3, 0.3, 0.9)}}};
    const auto traces = wbf(branches, w, 0.3);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].members.size() == 2);
    CHECK(std::fabs(traces[0].fused.box.x - 0.1) <= 1e-12);
  }
}

TEST_CASE("low-threshold union with dedup") {
  SUBCASE("duplicates keep the higher scoring copy") {
    const std::vector<Detection> global{det(0.1, 0.1, 0.3, 0.3, 0.8)};
    const std::vector<Detection> repair{det(0.11, 0.1, 0.3, 0.3, 0.6)};
    const auto out = union_low_threshold(global, repair, 0.10);
    REQUIRE(out.size() == 1);
    CHECK(out[0].score == 0.8);
  }
  SUBCASE("repair-only boxes above the low bar are admitted") {
    const std::vector<Detection> global{det(0.1, 0.1, 0.2, 0.2, 0.9)};
    const std::vector<Detection> repair{det(0.6, 0.6, 0.2, 0.2, 0.15)};
    const auto out = union_low_threshold(global, repair, 0.10);
    CHECK(out.size() == 2);
  }
  SUBCASE("boxes below the low bar are dropped") {
    const std::vector<Detection> repair{det(0.6, 0.6, 0.2, 0.2, 0.05)};
    const auto out = union_low_threshold({}, repair, 0.10);
    CHECK(out.empty());
  }
  SUBCASE("score ties prefer the global copy") {
    const std::vector<Detection> global{det(0.1, 0.1, 0.3, 0.3, 0.7, "cz")};
    auto repair_box = det(0.12, 0.1, 0.3, 0.3, 0.7, "cz");
    const auto out = union_low_threshold(global, {repair_box}, 0.10);
    REQUIRE(out.size() == 1);
    CHECK(out[0].box == Box{0.1, 0.1, 0.3, 0.3});
  }
  SUBCASE("sigma_c domain") {
    CHECK_THROWS_AS(union_low_threshold({}, {}, -0.1), InvalidThresholds);
    CHECK_THROWS_AS(union_low_threshold({}, {}, 1.0), InvalidThresholds);
  }
}

TEST_CASE("score re-projection") {
  SUBCASE("identity-parameter sigmoid at 0.5") {
    const auto out = score_reprojection({det(0, 0, 1, 1, 0.5)}, "cz", 1.0, 0.0);
    CHECK(std::fabs(out[0].score - 0.6224593312018546) <= 1e-12);
  }
  SUBCASE("other classes are untouched, bit for bit") {
    const std::vector<Detection> dets{det(0, 0, 1, 1, 0.5, "cz"),
                                      det(0, 0, 1, 1, 0.37, "jl")};
    const auto out = score_reprojection(dets, "cz", 2.0, -0.5);
    CHECK(out[1].score == 0.37);
    CHECK(out[1].box == dets[1].box);
  }
  SUBCASE("monotone in the input score for positive slope") {
    const auto out = score_reprojection(
        {det(0, 0, 1, 1, 0.2), det(0, 0, 1, 1, 0.5), det(0, 0, 1, 1, 0.8)}, "cz",
        3.0, -1.0);
    CHECK(out[0].score < out[1].score);
    CHECK(out[1].score < out[2].score);
  }
  SUBCASE("chosen intercept can halve a confident score") {
    // sigmoid(0.8 + b) = 0.4 when b = ln(2/3) - 0.8.
    const double b = std::log(2.0 / 3.0) - 0.8;
    const auto out = score_reprojection({det(0, 0, 1, 1, 0.8)}, "cz", 1.0, b);
    CHECK(std::fabs(out[0].score - 0.4) <= 1e-12);
  }
}

TEST_CASE("uniform fusion over images and classes") {
  BranchPredictions g;
  g.branch_id = "g";
  g.per_image["img_a"] = {det(0.1, 0.1, 0.3, 0.3, 0.9, "cz"),
                          det(0.5, 0.5, 0.2, 0.2, 0.8, "jl")};
  g.per_image["img_b"] = {det(0.2, 0.2, 0.3, 0.3, 0.7, "cz")};
  BranchPredictions r;
  r.branch_id = "r";
  r.per_image["img_a"] = {det(0.12, 0.1, 0.3, 0.3, 0.6, "cz")};
  r.per_image["img_b"] = {};

  SUBCASE("classes never mix") {
    UniformFusionConfig cfg;
    cfg.op = FusionOp::Nms;
    cfg.iou_thresh = 0.3;
    const auto fused = fuse_uniform({g, r}, cfg);
    // jl box must be intact: nothing in its class competes with it.
    bool found = false;
    for (const auto& d : fused.per_image.at("img_a"))
      if (d.class_code == "jl") {
        found = true;
        CHECK(d.score == 0.8);
      }
    CHECK(found);
    // cz pair overlaps heavily; only the stronger remains.
    int cz_count = 0;
    for (const auto& d : fused.per_image.at("img_a"))
      if (d.class_code == "cz") ++cz_count;
    CHECK(cz_count == 1);
  }
  SUBCASE("deterministic across repeated calls") {
    UniformFusionConfig cfg;
    cfg.op = FusionOp::Wbf;
    const auto once = fuse_uniform({g, r}, cfg);
    const auto twice = fuse_uniform({g, r}, cfg);
    CHECK(once.per_image == twice.per_image);
    CHECK(once.branch_id == "fused");
  }
  SUBCASE("union requires exactly two branches") {
    UniformFusionConfig cfg;
    cfg.op = FusionOp::Union;
    CHECK_THROWS_AS(fuse_uniform({g}, cfg), InvalidArgument);
    CHECK_THROWS_AS(fuse_uniform({g, r, g}, cfg), InvalidArgument);
  }
  SUBCASE("image sets must agree") {
    auto r2 = r;
    r2.per_image.erase("img_b");
    UniformFusionConfig cfg;
    cfg.op = FusionOp::Nms;
    CHECK_THROWS_AS(fuse_uniform({g, r2}, cfg), ManifestMismatch);
  }
}
