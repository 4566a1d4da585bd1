// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "ucsg/training.hpp"

using namespace ucsg;
using ucsg::ad::Tensor;

namespace {

Grid disk_grid(std::size_t r, double cx, double cy, double rad) {
  Grid g(2, r);
  for (std::size_t y = 0; y < r; ++y)
    for (std::size_t x = 0; x < r; ++x) {
      const double px = g.center(x) - cx, py = g.center(y) - cy;
      g.cells[y * r + x] = px * px + py * py <= rad * rad ? 1 : 0;
    }
  return g;
}

sdf::PrimitiveSet make_prims(std::size_t batch, std::vector<double> params, std::vector<double> translation) {
  sdf::PrimitiveSet p;
  p.kinds = {sdf::PrimitiveKind::Circle, sdf::PrimitiveKind::Rectangle};
  p.params = Tensor::from({batch, 2, 2}, std::move(params), true);
  p.translation = Tensor::from({batch, 2, 2}, std::move(translation), true);
  p.rotation = Tensor::zeros({batch, 2, 1}, true);
  return p;
}

std::vector<Grid> disk_dataset(std::size_t n, std::size_t r, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Grid> data;
  for (std::size_t i = 0; i < n; ++i)
    data.push_back(disk_grid(r, rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.15, 0.3)));
  return data;
}

std::vector<double> flat_weights(const net::Model& model) {
  std::vector<double> out;
  for (const auto& p : model.parameters()) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

}  // namespace

TEST_CASE("exhaustive sampling returns every cell center with its label") {
  const Grid g = disk_grid(16, 0.05, -0.1, 0.25);
  Rng rng(1);
  const auto s = train::sample_points(g, train::SamplingMode::Exhaustive, 0, rng);
  REQUIRE(s.points.shape() == ad::Shape{256, 2});
  REQUIRE(s.occupancy.numel() == 256);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      const std::size_t i = y * 16 + x;
      CHECK(s.points[i * 2] == g.center(x));
      CHECK(s.points[i * 2 + 1] == g.center(y));
      CHECK(s.occupancy[i] == g.cells[i]);
    }
}

TEST_CASE("a full grid yields all-inside samples in both modes") {
  Grid g(2, 8);
  std::fill(g.cells.begin(), g.cells.end(), 1);
  Rng rng(2);
  for (auto mode : {train::SamplingMode::Exhaustive, train::SamplingMode::BoundaryBiased}) {
    const auto s = train::sample_points(g, mode, 500, rng);
    for (double v : s.occupancy.data()) CHECK(v == 1.0);
  }
}

TEST_CASE("an empty grid cannot be sampled") {
  Grid g(2, 8);
  Rng rng(3);
  CHECK_THROWS_AS(train::sample_points(g, train::SamplingMode::Exhaustive, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(train::sample_points(g, train::SamplingMode::BoundaryBiased, 10, rng), std::invalid_argument);
}

TEST_CASE("boundary-biased samples concentrate near the surface") {
  const std::size_t r = 64;
  const Grid g = disk_grid(r, 0.03, -0.02, 0.3);
  // Brute-force mask of cells within two cells (Chebyshev) of a label change.
  std::vector<std::uint8_t> near(g.size(), 0);
  for (std::size_t y = 0; y < r; ++y)
    for (std::size_t x = 0; x < r; ++x) {
      const auto v = g.cells[y * r + x];
      for (long dy = -2; dy <= 2 && !near[y * r + x]; ++dy)
        for (long dx = -2; dx <= 2; ++dx) {
          const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(r) || xx >= static_cast<long>(r)) continue;
          if (g.cells[static_cast<std::size_t>(yy) * r + static_cast<std::size_t>(xx)] != v) {
            near[y * r + x] = 1;
            break;
          }
        }
    }
  Rng rng(4);
  const std::size_t count = 4000;
  const auto s = train::sample_points(g, train::SamplingMode::BoundaryBiased, count, rng);
  REQUIRE(s.points.shape() == ad::Shape{count, 2});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double* p = s.points.data().data() + i * 2;
    CHECK(p[0] >= -0.5);
    CHECK(p[0] <= 0.5);
    CHECK(s.occupancy[i] == g.at_point(p));
    if (near[g.index_of(p[1]) * r + g.index_of(p[0])]) ++hits;
  }
  CHECK(static_cast<double>(hits) / count >= 0.5);
}

TEST_CASE("mean squared error examples") {
  CHECK(train::loss_mse(Tensor::from({2}, {1.0, 0.0}), Tensor::from({2}, {0.0, 0.0})).item() == 0.5);
  CHECK(train::loss_mse(Tensor::from({3}, {0.5, 0.5, 0.5}), Tensor::from({3}, {0.5, 0.5, 0.5})).item() == 0.0);
  CHECK_THROWS_AS(train::loss_mse(Tensor::zeros({2}), Tensor::zeros({3})), ad::ShapeError);
}

TEST_CASE("loss terms match scalar oracles") {
  Rng rng(5);
  const std::size_t batch = 3;
  std::vector<double> params(batch * 4), trans(batch * 4);
  for (double& v : params) v = rng.uniform(-0.3, 0.3);
  for (double& v : trans) v = rng.uniform(-1.0, 1.0);
  const auto prims = make_prims(batch, params, trans);

  double pos = 0.0, tr = 0.0;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < 2; ++j) {
      const std::size_t used = j == 0 ? 1 : 2;  // circle reads one slot
      for (std::size_t k = 0; k < used; ++k) pos += std::max(-params[(b * 2 + j) * 2 + k], 0.0);
      const double tx = trans[(b * 2 + j) * 2], ty = trans[(b * 2 + j) * 2 + 1];
      tr += std::max(tx * tx + ty * ty, 0.5);
    }
  pos /= batch;
  tr /= batch;
  CHECK(std::abs(train::loss_param_positivity(prims).item() - pos) <= 1e-15);
  CHECK(std::abs(train::loss_translation(prims).item() - tr) <= 1e-15);
}

TEST_CASE("translation loss is flat inside the clipping radius") {
  auto prims = make_prims(1, {0.1, 0.1, 0.1, 0.1}, {0.1, 0.2, -0.3, 0.1});
  ad::Tape tape;
  const Tensor l = train::loss_translation(prims);
  CHECK(l.item() == 1.0);
  tape.backward(l);
  for (double g : prims.translation.grad()) CHECK(g == 0.0);
}

TEST_CASE("total loss examples for both stages") {
  train::TrainConfig cfg;
  train::LossTerms terms{Tensor::scalar(0.0), Tensor::scalar(0.0), Tensor::scalar(0.0), Tensor::scalar(1.0),
                         {Tensor::scalar(2.0), Tensor::scalar(2.0)}};
  CHECK(std::abs(train::loss_total(1, terms, cfg).item() - 0.1) <= 1e-15);
  CHECK(std::abs(train::loss_total(2, terms, cfg).item() - 0.5) <= 1e-15);
  terms.mse = Tensor::scalar(0.25);
  terms.translation = Tensor::scalar(1.0);
  CHECK(std::abs(train::loss_total(1, terms, cfg).item() - 0.45) <= 1e-15);
}

TEST_CASE("one Adam step matches the closed form") {
  Tensor w = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  {
    train::Adam opt({{"w", w}}, 0.01, 0.5, 0.99, 1e-8);
    const std::vector<double> g = {0.3, -1.5, 0.0};
    std::copy(g.begin(), g.end(), w.mutable_grad().begin());
    opt.step();
    const std::vector<double> w0 = {1.0, -2.0, 0.5};
    for (std::size_t k = 0; k < 3; ++k) {
      const double m = 0.5 * g[k] / 0.5, v = 0.01 * g[k] * g[k] / 0.01;
      const double expected = w0[k] - 0.01 * m / (std::sqrt(v) + 1e-8);
      CHECK(std::abs(w[k] - expected) <= 1e-15);
    }
    for (double gk : w.grad()) CHECK(gk == 0.0);
    CHECK(opt.steps() == 1);

    std::vector<double> before(w.data().begin(), w.data().end());
    std::fill(w.mutable_grad().begin(), w.mutable_grad().end(), 1.0);
    opt.step();
    const double c1 = 1 - 0.25, c2 = 1 - 0.99 * 0.99;
    for (std::size_t k = 0; k < 3; ++k) {
      const double m = 0.5 * (0.5 * g[k]) + 0.5, v = 0.99 * (0.01 * g[k] * g[k]) + 0.01;
      CHECK(std::abs(w[k] - (before[k] - 0.01 * (m / c1) / (std::sqrt(v / c2) + 1e-8))) <= 1e-15);
    }
  }
}

TEST_CASE("alpha and temperatures never fall below epsilon") {
  const auto cfg_model = testing::small_config();
  net::Model model(cfg_model, 6);
  const auto data = disk_dataset(4, 16, 7);
  train::TrainConfig tc;
  tc.learning_rate = 0.5;
  tc.batch_size = 2;
  tc.max_epochs = 3;
  tc.seed = 8;
  model.alpha().mutable_data()[0] = 2e-5;
  for (auto t : model.taus()) t.mutable_data()[0] = 2e-5;
  train::Trainer tr(model, data, tc);
  tr.on_step = [&](const train::StepRecord& s) {
    CHECK(s.alpha >= tc.epsilon);
    for (double t : s.taus) CHECK(t >= tc.epsilon);
  };
  tr.train();
  CHECK(model.alpha().item() >= tc.epsilon);
}

TEST_CASE("stage two begins exactly once") {
  net::Model model(testing::small_config(), 9);
  const auto data = disk_dataset(4, 16, 10);
  train::TrainConfig tc;
  tc.learning_rate = 0.02;
  tc.batch_size = 2;
  tc.max_epochs = 12;
  tc.stage_trigger = 0.9;
  tc.seed = 11;
  train::Trainer tr(model, data, tc);
  const auto report = tr.train();
  std::size_t flips = 0;
  for (std::size_t i = 1; i < report.epochs.size(); ++i) {
    CHECK(report.epochs[i].stage >= report.epochs[i - 1].stage);
    if (report.epochs[i].stage != report.epochs[i - 1].stage) ++flips;
  }
  REQUIRE(report.final_stage == 2);
  CHECK(flips == 1);
  CHECK(report.epochs[report.stage_flip_epoch - 1].alpha <= tc.stage_trigger);
  CHECK(report.epochs[report.stage_flip_epoch - 1].stage == 1);
  for (std::size_t i = 0; i + 1 < report.stage_flip_epoch; ++i) CHECK(report.epochs[i].alpha > tc.stage_trigger);
}

TEST_CASE("training is reproducible for a fixed seed") {
  const auto data = disk_dataset(4, 16, 12);
  auto run = [&](train::SamplingMode mode) {
    net::Model model(testing::small_config(), 13);
    train::TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 2;
    tc.max_epochs = 2;
    tc.seed = 14;
    tc.sampling = mode;
    tc.sample_count = 128;
    train::Trainer tr(model, data, tc);
    std::vector<double> losses;
    for (const auto& e : tr.train().epochs) losses.push_back(e.loss_total);
    return std::make_pair(losses, flat_weights(model));
  };
  for (auto mode : {train::SamplingMode::Exhaustive, train::SamplingMode::BoundaryBiased}) {
    const auto a = run(mode), b = run(mode);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("divergent training raises an error") {
  net::Model model(testing::small_config(), 15);
  const auto data = disk_dataset(2, 16, 16);
  model.heads()[0].bias.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  train::TrainConfig tc;
  tc.max_epochs = 1;
  train::Trainer tr(model, data, tc);
  CHECK_THROWS_AS(tr.train(), train::DivergenceError);
}

TEST_CASE("full pipeline gradients agree with finite differences") {
  net::Model model(testing::small_config(), 17);
  Rng data_rng(18);
  const Tensor input = testing::disk_images(2, 16, data_rng);
  const Tensor points = testing::grid_points_2d(16);
  std::vector<double> target(input.data().begin(), input.data().end());
  const Tensor target_t = Tensor::from({2, 256}, target);
  train::TrainConfig tc;

  // Spread alpha and the temperatures so gradients are not saturated.
  model.alpha().mutable_data()[0] = 0.3;
  std::vector<std::pair<std::string, Tensor>> params;
  for (const auto& p : model.parameters()) params.emplace_back(p.name, p.tensor);

  for (int stage : {1, 2}) {
    auto fn = [&]() {
      Rng rng(19);
      const auto out = model.forward(input, points, net::Mode::Train, rng);
      train::LossTerms terms{train::loss_mse(out.occupancy, target_t), train::loss_param_positivity(out.primitives),
                             train::loss_translation(out.primitives), out.alpha, out.taus};
      return train::loss_total(stage, terms, tc);
    };
    Rng pick(20 + stage);
    const auto res = testing::check_gradients(fn, params, 6, pick);
    INFO("stage " << stage << ": " << res.worst);
    CHECK(res.checked > 100);
    CHECK(res.max_rel_error <= 1e-5);
  }
}
