// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "ucsg/io.hpp"

using namespace ucsg;
using namespace ucsg::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ucsg_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DataError::Kind error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("no DataError raised");
  return DataError::Kind::Format;
}

Grid pattern(int dim, std::size_t r) {
  Grid g(dim, r);
  for (std::size_t i = 0; i < g.size(); ++i) g.cells[i] = (i * 7 + i / 3) % 5 < 2;
  return g;
}

}  // namespace

TEST_CASE("PGM files round-trip and binarize at 128") {
  TempDir dir("pgm");
  const Grid g = pattern(2, 64);
  write_pgm(dir.path / "a.pgm", g);
  CHECK(read_pgm(dir.path / "a.pgm") == g);

  std::string bytes = "P5\n# comment\n4 4\n255\n";
  for (int i = 0; i < 16; ++i) bytes += static_cast<char>(i * 16 + 7);  // 7, 23, ..., 247
  write_bytes(dir.path / "b.pgm", bytes);
  const Grid b = read_pgm(dir.path / "b.pgm", 4);
  for (std::size_t i = 0; i < 16; ++i) CHECK(b.cells[i] == (i * 16 + 7 >= 128 ? 1 : 0));
}

TEST_CASE("PGM errors are distinct and name the file") {
  TempDir dir("pgm_err");
  write_pgm(dir.path / "small.pgm", pattern(2, 32));
  try {
    read_pgm(dir.path / "small.pgm", 64);
    FAIL("accepted a 32x32 file");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataError::Kind::Dimension);
    CHECK(std::string(e.what()).find("small.pgm") != std::string::npos);
  }
  write_bytes(dir.path / "magic.pgm", "P2\n64 64\n255\n");
  CHECK(error_kind([&] { read_pgm(dir.path / "magic.pgm"); }) == DataError::Kind::BadMagic);
  write_bytes(dir.path / "short.pgm", "P5\n64 64\n255\n" + std::string(100, '\xff'));
  CHECK(error_kind([&] { read_pgm(dir.path / "short.pgm"); }) == DataError::Kind::Truncated);
  write_bytes(dir.path / "header.pgm", "P5\n64");
  CHECK(error_kind([&] { read_pgm(dir.path / "header.pgm"); }) == DataError::Kind::Truncated);
  write_bytes(dir.path / "deep.pgm", "P5\n64 64\n65535\n");
  CHECK(error_kind([&] { read_pgm(dir.path / "deep.pgm"); }) == DataError::Kind::Format);
  CHECK(error_kind([&] { read_pgm(dir.path / "missing.pgm"); }) == DataError::Kind::NotFound);
}

TEST_CASE("voxel files round-trip and reject malformed input") {
  TempDir dir("vox");
  const Grid g = pattern(3, 16);
  write_voxels(dir.path / "a.vox", g);
  CHECK(read_bytes(dir.path / "a.vox").substr(0, 8) == "UCSGVOX1");
  CHECK(read_voxels(dir.path / "a.vox", 16) == g);
  CHECK(error_kind([&] { read_voxels(dir.path / "a.vox", 32); }) == DataError::Kind::Truncated);
  CHECK(error_kind([&] { read_voxels(dir.path / "a.vox", 8); }) == DataError::Kind::Dimension);
  write_bytes(dir.path / "bad.vox", "UCSGVOX2" + std::string(16 * 16 * 16, '\0'));
  CHECK(error_kind([&] { read_voxels(dir.path / "bad.vox", 16); }) == DataError::Kind::BadMagic);
}

TEST_CASE("directories load in filename order") {
  TempDir dir("dir");
  const std::vector<std::string> names = {"c", "a", "b10", "b2"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    Grid g(2, 64);
    g.cells[i] = 1;
    write_pgm(dir.path / (names[i] + ".pgm"), g);
  }
  write_bytes(dir.path / "notes.txt", "ignored");
  const auto ds = load_dataset(dir.path, DatasetKind::PgmDir);
  CHECK(ds.names == std::vector<std::string>{"a", "b10", "b2", "c"});
  CHECK(ds.grids[0].cells[1] == 1);
  CHECK(ds.grids[3].cells[0] == 1);
  CHECK(load_dataset_auto(dir.path).names == ds.names);

  TempDir empty("empty");
  CHECK(error_kind([&] { load_dataset(empty.path, DatasetKind::PgmDir); }) == DataError::Kind::NotFound);
}

TEST_CASE("synthetic corpora are reproducible and self-consistent") {
  SyntheticOptions o;
  o.count = 40;
  o.seed = 7;
  o.resolution = 32;
  const auto a = generate_synthetic(o), b = generate_synthetic(o);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].tree == b[i].tree);
    CHECK(a[i].grid == b[i].grid);
    CHECK(a[i].grid == tree::rasterize(a[i].tree, 32));
    CHECK(a[i].grid.filled() > 0);
    const auto leaves = a[i].tree.leaf_count();
    CHECK(leaves >= 2);
    CHECK(leaves <= 4);
  }
  CHECK(a[3].name == "sample_00003");

  o.seed = 8;
  CHECK(!(generate_synthetic(o)[0].tree == a[0].tree));
}

TEST_CASE("synthetic primitives follow the configured ranges") {
  SyntheticOptions o;
  o.count = 50;
  o.seed = 9;
  o.resolution = 16;
  for (const auto& s : generate_synthetic(o)) {
    std::function<void(const tree::Node&)> visit = [&](const tree::Node& n) {
      if (!n.leaf) {
        visit(*n.left);
        visit(*n.right);
        return;
      }
      for (double p : n.primitive.params) {
        CHECK(p >= 0.1);
        CHECK(p <= 0.4);
      }
      for (double t : n.primitive.translation) {
        CHECK(t >= -0.25);
        CHECK(t <= 0.25);
      }
    };
    visit(*s.tree.root);
  }
}

TEST_CASE("written corpora reload through the manifest") {
  TempDir dir("synth");
  SyntheticOptions o;
  o.count = 8;
  o.seed = 10;
  const auto samples = generate_synthetic(o);
  write_synthetic(dir.path, samples, o);
  CHECK(fs::exists(dir.path / "manifest.json"));
  CHECK(fs::exists(dir.path / "sample_00000.pgm"));
  CHECK(fs::exists(dir.path / "sample_00000.json"));

  const auto ds = load_dataset(dir.path, DatasetKind::SyntheticManifest);
  REQUIRE(ds.grids.size() == 8);
  REQUIRE(ds.trees.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(ds.names[i] == samples[i].name);
    CHECK(ds.grids[i] == samples[i].grid);
    CHECK(ds.trees[i] == samples[i].tree);
    CHECK(ds.grids[i] == tree::rasterize(ds.trees[i], 64));
  }
  CHECK(load_dataset_auto(dir.path).names == ds.names);

  // Byte-identical output for the same seed.
  TempDir again("synth2");
  write_synthetic(again.path, generate_synthetic(o), o);
  for (const auto& e : fs::directory_iterator(dir.path))
    CHECK(read_bytes(e.path()) == read_bytes(again.path / e.path().filename()));

  CHECK(error_kind([&] { load_dataset(dir.path, DatasetKind::SyntheticManifest, 32); }) ==
        DataError::Kind::Dimension);
  write_bytes(dir.path / "manifest.json", "{\"dim\": 2}");
  CHECK(error_kind([&] { load_dataset(dir.path, DatasetKind::SyntheticManifest); }) == DataError::Kind::Format);
}

TEST_CASE("three-dimensional corpora use voxel files") {
  TempDir dir("synth3");
  SyntheticOptions o;
  o.count = 3;
  o.dim = 3;
  o.resolution = 16;
  o.seed = 11;
  const auto samples = generate_synthetic(o);
  write_synthetic(dir.path, samples, o);
  CHECK(fs::exists(dir.path / "sample_00002.vox"));
  const auto ds = load_dataset(dir.path, DatasetKind::SyntheticManifest, 16);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ds.grids[i].dim == 3);
    CHECK(ds.grids[i] == samples[i].grid);
  }
}
