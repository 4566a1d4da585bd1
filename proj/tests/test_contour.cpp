// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "ucsg/contour.hpp"

using namespace ucsg;
using namespace ucsg::contour;

namespace {

double signed_area(const std::vector<std::array<double, 2>>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& p = loop[i];
    const auto& q = loop[(i + 1) % loop.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

Field disk_field(std::size_t r, double radius) {
  return sampled_field(2, r, [&](const double* x) { return radius - std::hypot(x[0], x[1]); });
}

Grid square_ring(std::size_t r) {
  Grid g(2, r);
  for (std::size_t y = 0; y < r; ++y)
    for (std::size_t x = 0; x < r; ++x) {
      const bool outer = x >= 2 && x < r - 2 && y >= 2 && y < r - 2;
      const bool hole = x >= 6 && x < r - 6 && y >= 6 && y < r - 6;
      g.cells[y * r + x] = outer && !hole;
    }
  return g;
}

}  // namespace

TEST_CASE("circle contour vertices lie near the true radius") {
  const std::size_t r = 128;
  const double cell = 1.0 / r;
  SUBCASE("signed distance samples") {
    const auto c = marching_squares(disk_field(r, 0.5), 0.0);
    REQUIRE(c.loops.size() == 1);
    CHECK(c.vertex_count() > 100);
    for (const auto& p : c.loops[0]) CHECK(std::abs(std::hypot(p[0], p[1]) - 0.5) <= 1.5 * cell);
  }
  SUBCASE("binary samples") {
    Grid g(2, r);
    for (std::size_t y = 0; y < r; ++y)
      for (std::size_t x = 0; x < r; ++x) g.cells[y * r + x] = std::hypot(g.center(x), g.center(y)) <= 0.5;
    const auto c = marching_squares(occupancy_field(g));
    REQUIRE(c.loops.size() == 1);
    for (const auto& p : c.loops[0]) CHECK(std::abs(std::hypot(p[0], p[1]) - 0.5) <= 1.5 * cell);
  }
}

TEST_CASE("loops are closed and oriented with the inside on the left") {
  const auto c = marching_squares(disk_field(64, 0.3), 0.0);
  REQUIRE(c.loops.size() == 1);
  CHECK(signed_area(c.loops[0]) == doctest::Approx(std::numbers::pi * 0.09).epsilon(0.01));
  CHECK(c.length() == doctest::Approx(2 * std::numbers::pi * 0.3).epsilon(0.01));

  const auto ring = marching_squares(occupancy_field(square_ring(32)));
  REQUIRE(ring.loops.size() == 2);
  const double a0 = signed_area(ring.loops[0]), a1 = signed_area(ring.loops[1]);
  CHECK(a0 * a1 < 0);
  const double outer = std::max(a0, a1), hole = std::min(a0, a1);
  CHECK(outer > 0);
  CHECK(outer + hole > 0);
}

TEST_CASE("fields without crossings produce empty contours") {
  CHECK(marching_squares(sampled_field(2, 16, [](const double*) { return 1.0; })).loops.empty());
  CHECK(marching_squares(occupancy_field(Grid(2, 16))).loops.empty());
  CHECK(marching_cubes(sampled_field(3, 8, [](const double*) { return 1.0; })).triangles.empty());
  CHECK(marching_cubes(occupancy_field(Grid(3, 8))).triangles.empty());
}

TEST_CASE("a full grid is bounded by the padding ring") {
  Grid g(2, 8);
  std::fill(g.cells.begin(), g.cells.end(), 1);
  const auto c = marching_squares(occupancy_field(g));
  REQUIRE(c.loops.size() == 1);
  // Square with its four corners cut by half-cell chamfers.
  CHECK(signed_area(c.loops[0]) == doctest::Approx(1.0 - 2.0 * (0.5 / 8) * (0.5 / 8)).epsilon(1e-12));
}

TEST_CASE("diagonal saddles separate cells that touch only at a corner") {
  Grid g(2, 8);
  g.cells[3 * 8 + 3] = 1;
  g.cells[4 * 8 + 4] = 1;
  CHECK(marching_squares(occupancy_field(g)).loops.size() == 2);
  // A center value above the iso level joins the two blobs.
  Field f = occupancy_field(g);
  const std::size_t p = f.padded();
  f.values[4 * p + 5] = 0.45;
  f.values[5 * p + 4] = 0.45;
  CHECK(marching_squares(f).loops.size() == 1);
}

TEST_CASE("sphere mesh area and watertightness") {
  const std::size_t r = 64;
  const auto field =
      sampled_field(3, r, [](const double* x) { return 0.4 - std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); });
  const auto mesh = marching_cubes(field, 0.0);
  const double expected = 4.0 * std::numbers::pi * 0.16;
  CHECK(std::abs(mesh.area() - expected) <= 0.1 * expected);
  for (const auto& v : mesh.vertices)
    CHECK(std::abs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 0.4) <= 1.5 / r);

  std::map<std::pair<std::size_t, std::size_t>, int> edges;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  std::size_t bad = 0;
  for (const auto& [key, count] : edges) bad += count != 2;
  CHECK(bad == 0);
}

TEST_CASE("binary voxel cube meshes into a closed surface") {
  Grid g(3, 8);
  for (std::size_t z = 2; z < 6; ++z)
    for (std::size_t y = 2; y < 6; ++y)
      for (std::size_t x = 2; x < 6; ++x) g.cells[(z * 8 + y) * 8 + x] = 1;
  const auto mesh = marching_cubes(occupancy_field(g));
  CHECK(!mesh.triangles.empty());
  for (const auto& v : mesh.vertices)
    for (double c : v) CHECK(std::abs(c) <= 0.25 + 1e-12);
}

TEST_CASE("invalid fields are rejected") {
  CHECK_THROWS_AS(marching_squares(occupancy_field(Grid(2, 4))), std::invalid_argument);
  CHECK_THROWS_AS(marching_squares(occupancy_field(Grid(3, 8))), std::invalid_argument);
  CHECK_THROWS_AS(marching_cubes(occupancy_field(Grid(2, 8))), std::invalid_argument);
  Field f = occupancy_field(Grid(2, 8));
  f.values.pop_back();
  CHECK_THROWS_AS(marching_squares(f), std::invalid_argument);
}

TEST_CASE("exports are deterministic and well formed") {
  const auto c = marching_squares(disk_field(32, 0.3), 0.0);
  const std::string svg = to_svg(c, 256);
  CHECK(svg == to_svg(c, 256));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("fill-rule=\"evenodd\"") != std::string::npos);
  CHECK(svg.find(" Z") != std::string::npos);

  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  CHECK(to_obj(m) == "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  CHECK(m.area() == 0.5);
}
