// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "ucsg/metrics.hpp"

using namespace ucsg;
using namespace ucsg::metrics;

namespace {

PointSet random_set(std::size_t n, int dim, Rng& rng) {
  PointSet s{dim, {}};
  for (std::size_t i = 0; i < n * static_cast<std::size_t>(dim); ++i) s.coords.push_back(rng.uniform(-0.5, 0.5));
  return s;
}

double brute_directed(const PointSet& a, const PointSet& b) {
  const auto d = static_cast<std::size_t>(a.dim);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a.coords[i * d + k] - b.coords[j * d + k];
        s += diff * diff;
      }
      best = std::min(best, s);
    }
    total += best;
  }
  return total / static_cast<double>(a.size());
}

Grid random_grid(std::size_t r, double fill, Rng& rng) {
  Grid g(2, r);
  for (auto& c : g.cells) c = rng.uniform() < fill;
  return g;
}

}  // namespace

TEST_CASE("chamfer distance examples") {
  const PointSet a{2, {0.0, 0.0}}, b{2, {1.0, 0.0}};
  CHECK(chamfer_distance(a, b) == 2.0);
  Rng rng(1);
  const auto x = random_set(50, 2, rng);
  CHECK(chamfer_distance(x, x) == 0.0);
}

TEST_CASE("chamfer distance matches the brute-force oracle") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    const auto a = random_set(200, dim, rng), b = random_set(200, dim, rng);
    const double oracle = brute_directed(a, b) + brute_directed(b, a);
    CHECK(std::abs(chamfer_distance(a, b) - oracle) <= 1e-12);
    CHECK(chamfer_distance(a, b) == chamfer_distance(b, a));
  }
}

TEST_CASE("duplicating a reference point leaves the nearest-neighbour term unchanged") {
  Rng rng(3);
  const auto a = random_set(100, 2, rng);
  const auto b = random_set(80, 2, rng);
  auto dup = b;
  dup.coords.push_back(b.coords[10]);
  dup.coords.push_back(b.coords[11]);
  CHECK(brute_directed(a, dup) == brute_directed(a, b));
  CHECK(std::abs(chamfer_distance(a, dup) - (brute_directed(a, b) + brute_directed(dup, a))) <= 1e-12);
}

TEST_CASE("chamfer distance rejects invalid input") {
  const PointSet empty{2, {}}, one{2, {0.0, 0.0}}, three{3, {0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(chamfer_distance(empty, one), std::invalid_argument);
  CHECK_THROWS_AS(chamfer_distance(one, three), std::invalid_argument);
}

TEST_CASE("contour sampling is length weighted") {
  contour::Contour square;
  square.loops = {{{{-0.5, -0.5}}, {{0.5, -0.5}}, {{0.5, 0.5}}, {{-0.5, 0.5}}}};
  Rng rng(4);
  const auto s = sample_contour(square, 4000, rng);
  REQUIRE(s.size() == 4000);
  std::size_t side[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.coords[2 * i], y = s.coords[2 * i + 1];
    if (y == -0.5) ++side[0];
    else if (x == 0.5) ++side[1];
    else if (y == 0.5) ++side[2];
    else if (x == -0.5) ++side[3];
  }
  for (auto n : side) {
    CHECK(n >= 900);
    CHECK(n <= 1100);
  }
  CHECK(side[0] + side[1] + side[2] + side[3] == 4000);
}

TEST_CASE("mesh sampling stays on the triangles") {
  contour::Mesh m;
  m.vertices = {{0.1, 0.0, 0.2}, {0.4, 0.1, 0.2}, {0.2, 0.3, 0.2}};
  m.triangles = {{0, 1, 2}};
  Rng rng(5);
  const auto s = sample_mesh(m, 500, rng);
  REQUIRE(s.size() == 500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.coords[3 * i], y = s.coords[3 * i + 1], z = s.coords[3 * i + 2];
    CHECK(z == doctest::Approx(0.2));
    // Barycentric coordinates of (x, y) in the triangle.
    const double x0 = 0.1, y0 = 0.0, x1 = 0.4, y1 = 0.1, x2 = 0.2, y2 = 0.3;
    const double det = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2);
    const double l0 = ((y1 - y2) * (x - x2) + (x2 - x1) * (y - y2)) / det;
    const double l1 = ((y2 - y0) * (x - x2) + (x0 - x2) * (y - y2)) / det;
    CHECK(l0 >= -1e-12);
    CHECK(l1 >= -1e-12);
    CHECK(1 - l0 - l1 >= -1e-12);
  }
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  Grid g(2, 32);
  for (std::size_t y = 8; y < 24; ++y)
    for (std::size_t x = 10; x < 20; ++x) g.cells[y * 32 + x] = 1;
  Rng a(6), b(6);
  CHECK(sample_surface(g, 300, a).coords == sample_surface(g, 300, b).coords);
  Rng c(7), d(7);
  const auto r1 = sample_raster(g, 100, c), r2 = sample_raster(g, 100, d);
  CHECK(r1.coords == r2.coords);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    const double p[2] = {r1.coords[2 * i], r1.coords[2 * i + 1]};
    CHECK(g.at_point(p) == 1);
  }
}

TEST_CASE("grid IoU and accuracy") {
  Grid a(2, 8), b(2, 8);
  CHECK(grid_iou(a, b) == 1.0);
  a.cells[3] = 1;
  CHECK(grid_iou(a, a) == 1.0);
  b.cells[5] = 1;
  CHECK(grid_iou(a, b) == 0.0);
  CHECK(occupancy_accuracy(a, b) == 62.0 / 64.0);
  CHECK_THROWS_AS(grid_iou(a, Grid(2, 4)), std::invalid_argument);

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_grid(16, 0.4, rng), y = random_grid(16, 0.4, rng);
    std::size_t inter = 0, uni = 0, same = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.cells[i] == 1 && y.cells[i] == 1) ++inter;
      if (x.cells[i] == 1 || y.cells[i] == 1) ++uni;
      if (x.cells[i] == y.cells[i]) ++same;
    }
    CHECK(grid_iou(x, y) == static_cast<double>(inter) / uni);
    CHECK(occupancy_accuracy(x, y) == static_cast<double>(same) / 256.0);
  }
}
