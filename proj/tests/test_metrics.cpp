#include <cmath>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "wgdf/metrics.hpp"

using namespace wgdf;
using testutil::random_mask;

namespace {

Mask filled(int h, int w, uint8_t v) {
  Mask m(h, w);
  std::fill(m.v.begin(), m.v.end(), v);
  return m;
}

// Two separated squares; pred reproduces only the first.
std::pair<Mask, Mask> two_region_fixture() {
  Mask gt(16, 16);
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) gt.set(y, x, 1);
  for (int y = 10; y <= 13; ++y)
    for (int x = 10; x <= 13; ++x) gt.set(y, x, 1);
  Mask pred(16, 16);
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) pred.set(y, x, 1);
  return {pred, gt};
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("confusion: closed-form cases") {
  Mask ones = filled(2, 5, 1);
  auto c = confusion(ones, ones);
  CHECK(c.tp == 10);
  CHECK(c.fp + c.fn + c.tn == 0);

  Mask inv = ones;
  for (auto& v : inv.v) v = 1 - v;
  auto c2 = confusion(ones, inv);
  CHECK(c2.tp == 0);
  CHECK(c2.tn == 0);
  CHECK(c2.fp == 10);
}

TEST_CASE("confusion rejects non-binary masks and size mismatches") {
  Mask a(2, 2), b(2, 2);
  a.v[0] = 2;
  CHECK_THROWS_AS(confusion(a, b), ContractError);
  CHECK_THROWS_AS(confusion(Mask(2, 2), Mask(2, 3)), ContractError);
}

TEST_CASE("confusion matches the counting oracle exactly") {
  Rng rng(501);
  for (int i = 0; i < 50; ++i) {
    Mask pred = random_mask(rng, 32, 32);
    Mask gt = random_mask(rng, 32, 32);
    auto mine = confusion(pred, gt);
    auto ref = oracle::count_pixels(pred, gt);
    CHECK(mine.tp == ref.tp);
    CHECK(mine.fp == ref.fp);
    CHECK(mine.fn == ref.fn);
    CHECK(mine.tn == ref.tn);
  }
}

TEST_CASE("scores: worked example and conventions") {
  Scores s = scores(ConfusionCounts{8, 2, 2, 88});
  CHECK(s.precision == doctest::Approx(0.8));
  CHECK(s.recall == doctest::Approx(0.8));
  CHECK(s.f1 == doctest::Approx(0.8));
  CHECK(s.iou == doctest::Approx(8.0 / 12.0));
  CHECK(s.oa == doctest::Approx(0.96));

  Scores degenerate = scores(ConfusionCounts{0, 0, 0, 100});
  CHECK(degenerate.precision == 0.0);
  CHECK(degenerate.recall == 0.0);
  CHECK(degenerate.f1 == 0.0);
  CHECK(degenerate.iou == 0.0);
  CHECK(degenerate.oa == 1.0);
}

TEST_CASE("scores: f1 equals 2*iou/(1+iou)") {
  Rng rng(502);
  for (int i = 0; i < 100; ++i) {
    ConfusionCounts c{rng.uniform_int(0, 50), rng.uniform_int(0, 50),
                      rng.uniform_int(0, 50), rng.uniform_int(1, 50)};
    Scores s = scores(c);
    CHECK(s.f1 == doctest::Approx(2.0 * s.iou / (1.0 + s.iou)).epsilon(1e-12));
  }
}

TEST_CASE("sobel: flat fields have no edges") {
  CHECK(sobel_edges(filled(7, 7, 0)).count() == 0);
  CHECK(sobel_edges(filled(7, 7, 1)).count() == 0);
}

TEST_CASE("sobel: centered 3x3 square marks its 8-neighborhood boundary band") {
  Mask m(7, 7);
  for (int y = 2; y <= 4; ++y)
    for (int x = 2; x <= 4; ++x) m.set(y, x, 1);
  Mask edges = sobel_edges(m);
  Mask expected = oracle::sobel(m);
  CHECK(edges == expected);
  // The band: all square pixels except the center, plus the surrounding ring.
  CHECK(edges.at(3, 3) == 0);
  CHECK(edges.at(2, 2) == 1);
  CHECK(edges.at(1, 1) == 1);
  CHECK(edges.at(0, 0) == 0);
  CHECK(edges.count() == 24);
}

TEST_CASE("sobel matches the stencil oracle on random masks") {
  Rng rng(503);
  for (int i = 0; i < 50; ++i) {
    Mask m = random_mask(rng, 32, 32);
    CHECK(sobel_edges(m) == oracle::sobel(m));
  }
}

TEST_CASE("edge_miou: identical nonempty masks score 1.0") {
  Rng rng(504);
  int checked = 0;
  while (checked < 50) {
    Mask m = random_mask(rng, 32, 32, 0.3);
    if (m.count() == 0 || m.count() == int64_t(m.v.size())) continue;
    CHECK(edge_miou(m, m).value == 1.0);
    ++checked;
  }
}

TEST_CASE("edge_miou: empty prediction against one region scores 0") {
  Mask gt(16, 16);
  for (int y = 4; y <= 8; ++y)
    for (int x = 4; x <= 8; ++x) gt.set(y, x, 1);
  CHECK(edge_miou(Mask(16, 16), gt).value == 0.0);
}

TEST_CASE("edge_miou: empty gt conventions") {
  CHECK(edge_miou(Mask(8, 8), Mask(8, 8)).value == 1.0);
  Mask pred(8, 8);
  pred.set(4, 4, 1);
  CHECK(edge_miou(pred, Mask(8, 8)).value == 0.0);
}

TEST_CASE("edge_miou: two-region half-match fixture scores 0.5") {
  auto [pred, gt] = two_region_fixture();
  auto r = edge_miou(pred, gt);
  CHECK(r.value == 0.5);
  REQUIRE(r.regions.size() == 2);
  CHECK(r.regions[0].iou == 1.0);
  CHECK(r.regions[1].iou == 0.0);
}

TEST_CASE("edge_miou matches the brute-force oracle exactly") {
  Rng rng(505);
  for (int i = 0; i < 50; ++i) {
    Mask pred = random_mask(rng, 32, 32, 0.25);
    Mask gt = random_mask(rng, 32, 32, 0.25);
    CHECK(edge_miou(pred, gt).value == oracle::edge_miou(pred, gt));
  }
}

TEST_CASE("edge_miou stays in [0,1] and region windows are bounded") {
  Rng rng(506);
  for (int i = 0; i < 20; ++i) {
    Mask pred = random_mask(rng, 24, 24, 0.3);
    Mask gt = random_mask(rng, 24, 24, 0.3);
    auto r = edge_miou(pred, gt);
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0);
    for (const auto& reg : r.regions) {
      CHECK(reg.y0 >= 0);
      CHECK(reg.x0 >= 0);
      CHECK(reg.y1 < 24);
      CHECK(reg.x1 < 24);
      CHECK(reg.iou >= 0.0);
      CHECK(reg.iou <= 1.0);
    }
  }
}

TEST_SUITE_END();
