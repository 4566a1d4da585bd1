// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "support/fixtures.hpp"
#include "ucsg/evaluate.hpp"
#include "ucsg/io.hpp"
#include "ucsg/metrics.hpp"
#include "ucsg/training.hpp"

using namespace ucsg;

namespace {

std::vector<Grid> disk_grids(std::size_t n, std::size_t r, std::uint64_t seed) {
  Rng rng(seed);
  const auto images = testing::disk_images(n, r, rng);
  std::vector<Grid> out;
  for (std::size_t b = 0; b < n; ++b) {
    Grid g(2, r);
    for (std::size_t i = 0; i < g.size(); ++i) g.cells[i] = images.data()[b * g.size() + i] > 0.5 ? 1 : 0;
    out.push_back(g);
  }
  return out;
}

}  // namespace

TEST_CASE("predictions threshold single-sample eval forwards") {
  net::Model model(testing::small_config(), 11);
  const auto data = disk_grids(5, 16, 4);
  const auto grids = eval::predict(model, data, 16, 0.5, 2);
  REQUIRE(grids.size() == 5);
  Rng rng(0);
  for (std::size_t b = 0; b < 5; ++b) {
    const auto r = model.forward(train::batch_input(data, {b}), testing::grid_points_2d(16), net::Mode::Eval, rng);
    for (std::size_t p = 0; p < 256; ++p) CHECK(grids[b].cells[p] == (r.occupancy.data()[p] >= 0.5 ? 1 : 0));
  }
}

TEST_CASE("model reports aggregate per-sample metrics") {
  net::Model model(testing::small_config(), 12);
  const auto data = disk_grids(3, 16, 5);
  eval::Options o;
  o.resolution = 16;
  const auto report = eval::evaluate_model(model, data, {"a", "b", "c"}, o);
  REQUIRE(report.samples.size() == 3);
  const auto preds = eval::predict(model, data, 16);
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(report.samples[i].accuracy == metrics::occupancy_accuracy(preds[i], data[i]));
    CHECK(report.samples[i].iou == metrics::grid_iou(preds[i], data[i]));
    CHECK(report.samples[i].soft_hard_iou >= 0.0);
    CHECK(report.samples[i].soft_hard_iou <= 1.0);
    acc += report.samples[i].accuracy;
  }
  CHECK(report.mean_accuracy == doctest::Approx(acc / 3).epsilon(1e-15));
  const auto j = report.to_json();
  CHECK(j.at("count") == 3);
  CHECK(j.at("samples").at(1).at("name") == "b");
  CHECK(eval::evaluate_model(model, data, {"a", "b", "c"}, o).to_json() == j);
}

TEST_CASE("a ground-truth tree scores perfectly against its own raster") {
  io::SyntheticOptions so;
  so.count = 6;
  so.seed = 3;
  for (const auto& s : io::generate_synthetic(so)) {
    const auto m = eval::evaluate_tree_against(s.tree, s.grid, {});
    CHECK(m.accuracy == 1.0);
    CHECK(m.iou == 1.0);
    REQUIRE(m.chamfer.has_value());
    CHECK(*m.chamfer == 0.0);
  }
}

TEST_CASE("mismatched inputs are rejected") {
  net::Model model(testing::small_config(), 13);
  CHECK_THROWS_AS(eval::predict(model, {Grid(2, 32)}, 16), std::invalid_argument);
  eval::Options o;
  o.resolution = 32;
  CHECK_THROWS_AS(eval::evaluate_model(model, disk_grids(1, 16, 1), {"x"}, o), std::invalid_argument);
  o.resolution = 16;
  CHECK_THROWS_AS(eval::evaluate_model(model, disk_grids(1, 16, 1), {}, o), std::invalid_argument);
}
