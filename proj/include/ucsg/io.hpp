// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Raster and voxel file formats, datasets and the synthetic corpus.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucsg/grid.hpp"
#include "ucsg/rng.hpp"
#include "ucsg/tree.hpp"

namespace ucsg::io {

/// Raised for unreadable or malformed data files.
class DataError : public std::runtime_error {
 public:
  enum class Kind { NotFound, Truncated, BadMagic, Dimension, Format };
  DataError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Binary PGM (P5), 8-bit; pixels >= 128 are inside. Throws DataError.
Grid read_pgm(const std::filesystem::path& path, std::size_t expected_resolution = 64);
void write_pgm(const std::filesystem::path& path, const Grid& grid);

/// "UCSGVOX1" followed by resolution^3 bytes, x fastest; bytes >= 128 inside.
Grid read_voxels(const std::filesystem::path& path, std::size_t expected_resolution = 64);
void write_voxels(const std::filesystem::path& path, const Grid& grid);

enum class DatasetKind { PgmDir, VoxelDir, SyntheticManifest };

struct Dataset {
  std::vector<std::string> names;
  std::vector<Grid> grids;
  std::vector<tree::CsgTree> trees;  // ground truth, synthetic corpora only
};

/// Files sorted by name. A synthetic manifest path may be the manifest file
/// or the directory holding manifest.json.
Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind, std::size_t resolution = 64);
/// Chooses the kind from the directory contents.
Dataset load_dataset_auto(const std::filesystem::path& path, std::size_t resolution = 64);

struct SyntheticOptions {
  std::size_t count = 256;
  std::uint64_t seed = 0;
  int dim = 2;
  std::size_t resolution = 64;
  std::size_t min_primitives = 2;
  std::size_t max_primitives = 4;
};

struct SyntheticSample {
  std::string name;
  tree::CsgTree tree;
  Grid grid;
};

/// Random axis-aligned primitives (half-extent or radius in [0.1, 0.4],
/// centers in [-0.25, 0.25] per axis) combined left to right with random
/// operators. Samples whose raster is empty are redrawn.
std::vector<SyntheticSample> generate_synthetic(const SyntheticOptions& options);
/// Writes rasters, tree documents and manifest.json into `dir`.
void write_synthetic(const std::filesystem::path& dir, const std::vector<SyntheticSample>& samples,
                     const SyntheticOptions& options);

}  // namespace ucsg::io
