// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace ucsg::io {

namespace fs = std::filesystem;

namespace {

constexpr char kVoxelMagic[8] = {'U', 'C', 'S', 'G', 'V', 'O', 'X', '1'};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::NotFound, path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataError::Kind::NotFound, path.string() + ": cannot create file");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataError::Kind::Format, path.string() + ": write failed");
}

// Reads the next header token, skipping whitespace and comments.
bool next_token(const std::string& s, std::size_t& pos, std::string& token) {
  token.clear();
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '#') token += s[pos++];
  return !token.empty();
}

std::size_t parse_header_int(const std::string& token, const fs::path& path, const char* what) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
      token.size() > 9)
    throw DataError(DataError::Kind::Format, path.string() + ": invalid PGM " + what + " \"" + token + "\"");
  return std::stoul(token);
}

}  // namespace

Grid read_pgm(const fs::path& path, std::size_t expected_resolution) {
  const std::string data = read_file(path);
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw DataError(DataError::Kind::BadMagic, path.string() + ": not a binary PGM (P5) file");
  std::size_t pos = 2;
  std::string tok;
  std::size_t fields[3];
  const char* names[3] = {"width", "height", "maxval"};
  for (int i = 0; i < 3; ++i) {
    if (!next_token(data, pos, tok)) throw DataError(DataError::Kind::Truncated, path.string() + ": truncated PGM header");
    fields[i] = parse_header_int(tok, path, names[i]);
  }
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated PGM header");
  ++pos;
  const std::size_t w = fields[0], h = fields[1], maxval = fields[2];
  if (maxval == 0 || maxval > 255)
    throw DataError(DataError::Kind::Format, path.string() + ": only 8-bit PGM files are supported");
  if (w != expected_resolution || h != expected_resolution)
    throw DataError(DataError::Kind::Dimension, path.string() + ": expected " + std::to_string(expected_resolution) +
                                                    "x" + std::to_string(expected_resolution) + " image, got " +
                                                    std::to_string(w) + "x" + std::to_string(h));
  if (data.size() - pos < w * h)
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated pixel data (" +
                                                    std::to_string(data.size() - pos) + " of " + std::to_string(w * h) +
                                                    " bytes)");
  Grid g(2, w);
  for (std::size_t i = 0; i < w * h; ++i) g.cells[i] = static_cast<unsigned char>(data[pos + i]) >= 128 ? 1 : 0;
  return g;
}

void write_pgm(const fs::path& path, const Grid& grid) {
  if (grid.dim != 2) throw std::invalid_argument("write_pgm: grid is not 2-D");
  std::string out = "P5\n" + std::to_string(grid.resolution) + " " + std::to_string(grid.resolution) + "\n255\n";
  for (auto c : grid.cells) out += static_cast<char>(c ? 255 : 0);
  write_file(path, out);
}

Grid read_voxels(const fs::path& path, std::size_t expected_resolution) {
  const std::string data = read_file(path);
  if (data.size() < sizeof kVoxelMagic || !std::equal(std::begin(kVoxelMagic), std::end(kVoxelMagic), data.begin()))
    throw DataError(DataError::Kind::BadMagic, path.string() + ": missing UCSGVOX1 header");
  const std::size_t expected = expected_resolution * expected_resolution * expected_resolution;
  const std::size_t body = data.size() - sizeof kVoxelMagic;
  if (body < expected)
    throw DataError(DataError::Kind::Truncated, path.string() + ": truncated voxel data (" + std::to_string(body) +
                                                    " of " + std::to_string(expected) + " bytes)");
  if (body > expected)
    throw DataError(DataError::Kind::Dimension, path.string() + ": " + std::to_string(body) +
                                                    " voxels do not match the expected " +
                                                    std::to_string(expected_resolution) + "^3 grid");
  Grid g(3, expected_resolution);
  for (std::size_t i = 0; i < expected; ++i)
    g.cells[i] = static_cast<unsigned char>(data[sizeof kVoxelMagic + i]) >= 128 ? 1 : 0;
  return g;
}

void write_voxels(const fs::path& path, const Grid& grid) {
  if (grid.dim != 3) throw std::invalid_argument("write_voxels: grid is not 3-D");
  std::string out(kVoxelMagic, sizeof kVoxelMagic);
  for (auto c : grid.cells) out += static_cast<char>(c ? 255 : 0);
  write_file(path, out);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError(DataError::Kind::NotFound, dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

Dataset load_manifest(fs::path path, std::size_t resolution) {
  if (fs::is_directory(path)) path /= "manifest.json";
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(DataError::Kind::Format, path.string() + ": invalid manifest JSON: " + e.what());
  }
  const fs::path dir = path.parent_path();
  Dataset ds;
  try {
    const int dim = doc.at("dim").get<int>();
    const std::size_t res = doc.at("resolution").get<std::size_t>();
    if (res != resolution)
      throw DataError(DataError::Kind::Dimension, path.string() + ": corpus resolution " + std::to_string(res) +
                                                      " does not match the expected " + std::to_string(resolution));
    for (const auto& s : doc.at("samples")) {
      const std::string name = s.at("name").get<std::string>();
      const fs::path raster = dir / s.at("raster").get<std::string>();
      ds.names.push_back(name);
      ds.grids.push_back(dim == 3 ? read_voxels(raster, res) : read_pgm(raster, res));
      if (s.contains("tree")) {
        const fs::path tree_path = dir / s.at("tree").get<std::string>();
        try {
          ds.trees.push_back(tree::deserialize_tree(read_file(tree_path)));
        } catch (const tree::ParseError& e) {
          throw DataError(DataError::Kind::Format, tree_path.string() + ": " + e.what());
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataError::Kind::Format, path.string() + ": malformed manifest: " + e.what());
  }
  if (!ds.trees.empty() && ds.trees.size() != ds.grids.size())
    throw DataError(DataError::Kind::Format, path.string() + ": some samples lack a tree");
  return ds;
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetKind kind, std::size_t resolution) {
  Dataset ds;
  switch (kind) {
    case DatasetKind::PgmDir:
      for (const auto& f : files_with_extension(path, ".pgm")) {
        ds.names.push_back(f.stem().string());
        ds.grids.push_back(read_pgm(f, resolution));
      }
      break;
    case DatasetKind::VoxelDir:
      for (const auto& f : files_with_extension(path, ".vox")) {
        ds.names.push_back(f.stem().string());
        ds.grids.push_back(read_voxels(f, resolution));
      }
      break;
    case DatasetKind::SyntheticManifest: return load_manifest(path, resolution);
  }
  if (ds.grids.empty()) throw DataError(DataError::Kind::NotFound, path.string() + ": no samples found");
  return ds;
}

Dataset load_dataset_auto(const fs::path& path, std::size_t resolution) {
  if (fs::is_regular_file(path) && path.extension() == ".json")
    return load_dataset(path, DatasetKind::SyntheticManifest, resolution);
  if (fs::is_regular_file(path / "manifest.json")) return load_dataset(path, DatasetKind::SyntheticManifest, resolution);
  if (fs::is_directory(path) && !files_with_extension(path, ".vox").empty())
    return load_dataset(path, DatasetKind::VoxelDir, resolution);
  return load_dataset(path, DatasetKind::PgmDir, resolution);
}

// ---------------------------------------------------------------------------

std::vector<SyntheticSample> generate_synthetic(const SyntheticOptions& o) {
  if (o.dim != 2 && o.dim != 3) throw std::invalid_argument("generate_synthetic: dim must be 2 or 3");
  if (o.min_primitives < 1 || o.max_primitives < o.min_primitives)
    throw std::invalid_argument("generate_synthetic: invalid primitive count range");
  if (o.resolution < 2) throw std::invalid_argument("generate_synthetic: resolution too small");
  Rng rng(o.seed);
  const auto kinds = o.dim == 2 ? std::vector{sdf::PrimitiveKind::Circle, sdf::PrimitiveKind::Rectangle}
                                : std::vector{sdf::PrimitiveKind::Sphere, sdf::PrimitiveKind::Box};
  const tree::Op ops[3] = {tree::Op::Union, tree::Op::Intersection, tree::Op::Difference};
  std::vector<SyntheticSample> out;
  out.reserve(o.count);
  for (std::size_t s = 0; s < o.count; ++s) {
    SyntheticSample sample;
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu", s);
    sample.name = name;
    do {
      const std::size_t n = o.min_primitives + rng.below(o.max_primitives - o.min_primitives + 1);
      std::shared_ptr<tree::Node> root;
      for (std::size_t i = 0; i < n; ++i) {
        sdf::Primitive p;
        p.kind = kinds[rng.below(kinds.size())];
        for (std::size_t k = 0; k < sdf::param_count(p.kind); ++k) p.params.push_back(rng.uniform(0.1, 0.4));
        for (int k = 0; k < o.dim; ++k) p.translation.push_back(rng.uniform(-0.25, 0.25));
        p.rotation = o.dim == 2 ? std::vector<double>{0.0} : std::vector<double>{1.0, 0.0, 0.0, 0.0};
        auto leaf = tree::Node::make_leaf(std::move(p));
        root = root ? tree::Node::make_op(ops[rng.below(3)], root, leaf) : leaf;
      }
      sample.tree = tree::CsgTree{root};
      sample.grid = tree::rasterize(sample.tree, o.resolution);
    } while (sample.grid.filled() == 0);
    out.push_back(std::move(sample));
  }
  return out;
}

void write_synthetic(const fs::path& dir, const std::vector<SyntheticSample>& samples, const SyntheticOptions& o) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(DataError::Kind::NotFound, dir.string() + ": cannot create directory: " + ec.message());
  nlohmann::json manifest = {{"format", "ucsg-synthetic"},
                             {"version", 1},
                             {"dim", o.dim},
                             {"resolution", o.resolution},
                             {"seed", o.seed},
                             {"count", samples.size()},
                             {"samples", nlohmann::json::array()}};
  for (const auto& s : samples) {
    const std::string raster = s.name + (o.dim == 3 ? ".vox" : ".pgm");
    const std::string tree_file = s.name + ".json";
    if (o.dim == 3) write_voxels(dir / raster, s.grid);
    else write_pgm(dir / raster, s.grid);
    write_file(dir / tree_file, tree::serialize_tree(s.tree));
    manifest["samples"].push_back({{"name", s.name}, {"raster", raster}, {"tree", tree_file}});
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ucsg::io
