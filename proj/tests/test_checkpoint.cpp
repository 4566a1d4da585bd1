// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "ucsg/checkpoint.hpp"
#include "ucsg/training.hpp"

using namespace ucsg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ucsg_ckpt_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

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

std::vector<double> eval_forward(const net::Model& model, const std::vector<Grid>& data) {
  Rng rng(0);
  const auto r = model.forward(train::batch_input(data, {0, 1}), testing::grid_points_2d(16), net::Mode::Eval, rng);
  return {r.occupancy.data().begin(), r.occupancy.data().end()};
}

train::TrainConfig small_train() {
  train::TrainConfig t;
  t.batch_size = 2;
  t.learning_rate = 1e-3;
  t.seed = 5;
  return t;
}

}  // namespace

TEST_CASE("save then load reproduces eval outputs bitwise") {
  TempDir dir("roundtrip");
  const auto data = disk_grids(4, 16, 1);
  net::Model model(testing::small_config(), 3);
  checkpoint::save(dir.path, model, small_train());
  const auto loaded = checkpoint::load(dir.path);
  CHECK(loaded.train_config.seed == 5);
  CHECK(loaded.metadata.at("format") == "ucsg-checkpoint");
  CHECK_FALSE(loaded.metadata.contains("trainer"));

  const auto a = eval_forward(model, data), b = eval_forward(*loaded.model, data);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(a[i]) == std::bit_cast<std::uint64_t>(b[i]));

  const auto pa = model.parameters(), pb = loaded.model->parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(std::equal(pa[i].tensor.data().begin(), pa[i].tensor.data().end(), pb[i].tensor.data().begin()));
  }
}

TEST_CASE("identical saves are byte-identical") {
  TempDir a("same_a"), b("same_b");
  net::Model model(testing::small_config(), 4);
  checkpoint::save(a.path, model, small_train());
  checkpoint::save(b.path, model, small_train());
  for (const char* f : {"checkpoint.json", "weights.bin"}) CHECK(read_bytes(a.path / f) == read_bytes(b.path / f));
}

TEST_CASE("resumed training matches uninterrupted training") {
  const auto data = disk_grids(4, 16, 2);
  auto cfg = small_train();

  net::Model straight(testing::small_config(), 6);
  train::Trainer full(straight, data, cfg);
  std::vector<double> expected;
  for (int e = 0; e < 3; ++e) expected.push_back(full.run_epoch().loss_total);

  TempDir dir("resume");
  net::Model first(testing::small_config(), 6);
  train::Trainer part(first, data, cfg);
  CHECK(part.run_epoch().loss_total == expected[0]);
  checkpoint::save(dir.path, first, cfg, &part);

  auto loaded = checkpoint::load(dir.path);
  CHECK(loaded.metadata.at("epoch") == 1);
  CHECK(loaded.metadata.at("stage") == 1);
  train::Trainer resumed(*loaded.model, data, loaded.train_config);
  checkpoint::restore_trainer(dir.path, loaded, resumed);
  CHECK(resumed.optimizer().steps() == part.optimizer().steps());
  CHECK(resumed.optimizer().first_moments() == part.optimizer().first_moments());
  CHECK(resumed.optimizer().second_moments() == part.optimizer().second_moments());
  CHECK(resumed.run_epoch().loss_total == expected[1]);
  CHECK(resumed.run_epoch().loss_total == expected[2]);
}

TEST_CASE("malformed checkpoints raise CheckpointError") {
  TempDir dir("bad");
  net::Model model(testing::small_config(), 7);
  checkpoint::save(dir.path, model, small_train());
  const std::string meta = read_bytes(dir.path / "checkpoint.json");
  const std::string weights = read_bytes(dir.path / "weights.bin");

  auto expect_error = [&](const std::string& needle) {
    try {
      checkpoint::load(dir.path);
      FAIL("accepted a malformed checkpoint");
    } catch (const checkpoint::CheckpointError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };

  write_bytes(dir.path / "checkpoint.json", "{ not json");
  expect_error("invalid JSON");

  auto doc = nlohmann::json::parse(meta);
  doc["version"] = 9;
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("unsupported version");

  doc = nlohmann::json::parse(meta);
  doc["format"] = "other";
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("not a checkpoint");

  doc = nlohmann::json::parse(meta);
  doc["model"]["per_kind"] = 5;
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("has shape");

  doc = nlohmann::json::parse(meta);
  doc["blobs"].erase(0);
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("missing parameter");

  doc = nlohmann::json::parse(meta);
  doc["model"]["colour"] = 1;
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("model.colour");

  doc = nlohmann::json::parse(meta);
  doc.erase("train");
  write_bytes(dir.path / "checkpoint.json", doc.dump());
  expect_error("malformed metadata");

  write_bytes(dir.path / "checkpoint.json", meta);
  write_bytes(dir.path / "weights.bin", weights.substr(0, weights.size() - 8));
  expect_error("shorter");
  write_bytes(dir.path / "weights.bin", weights.substr(0, weights.size() - 3));
  expect_error("truncated");
  fs::remove(dir.path / "weights.bin");
  expect_error("cannot open");

  TempDir empty("empty");
  CHECK_THROWS_AS(checkpoint::load(empty.path), checkpoint::CheckpointError);
  write_bytes(dir.path / "weights.bin", weights);
  auto loaded = checkpoint::load(dir.path);
  train::Trainer trainer(*loaded.model, disk_grids(2, 16, 3), loaded.train_config);
  CHECK_THROWS_AS(checkpoint::restore_trainer(dir.path, loaded, trainer), checkpoint::CheckpointError);
}
