// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "ucsg/config.hpp"

namespace ucsg::checkpoint {

namespace fs = std::filesystem;

namespace {

constexpr int kVersion = 1;

void append_le(std::string& out, std::span<const double> values) {
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xff);
  }
}

void read_le(const std::string& in, std::size_t offset, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[(offset + i) * 8 + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(path.string() + ": cannot create file");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(path.string() + ": write failed");
}

struct Blob {
  std::size_t offset;
  std::size_t count;
  nlohmann::json shape;
};

std::map<std::string, Blob> blob_index(const nlohmann::json& meta, std::size_t total) {
  std::map<std::string, Blob> out;
  for (const auto& b : meta.at("blobs")) {
    Blob blob{b.at("offset").get<std::size_t>(), b.at("count").get<std::size_t>(), b.at("shape")};
    if (blob.offset + blob.count > total) throw CheckpointError("weights.bin is shorter than its metadata claims");
    out[b.at("name").get<std::string>()] = blob;
  }
  return out;
}

}  // namespace

void save(const fs::path& dir, const net::Model& model, const train::TrainConfig& train_config,
          const train::Trainer* trainer) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CheckpointError(dir.string() + ": cannot create directory: " + ec.message());

  std::string weights;
  nlohmann::json blobs = nlohmann::json::array();
  std::size_t offset = 0;
  auto add = [&](const std::string& name, const ad::Shape& shape, std::span<const double> values) {
    blobs.push_back({{"name", name}, {"shape", shape}, {"offset", offset}, {"count", values.size()}});
    append_le(weights, values);
    offset += values.size();
  };
  const auto params = model.parameters();
  for (const auto& p : params) add(p.name, p.tensor.shape(), p.tensor.data());

  nlohmann::json meta = {{"format", "ucsg-checkpoint"},
                         {"version", kVersion},
                         {"model", config::model_to_json(model.config())},
                         {"train", config::train_to_json(train_config)},
                         {"alpha", model.alpha().item()}};
  std::vector<double> taus;
  for (const auto& t : model.taus()) taus.push_back(t.item());
  meta["tau"] = taus;
  if (trainer) {
    const auto& adam = trainer->optimizer();
    for (std::size_t i = 0; i < params.size(); ++i) add("adam.m/" + params[i].name, params[i].tensor.shape(), adam.first_moments()[i]);
    for (std::size_t i = 0; i < params.size(); ++i) add("adam.v/" + params[i].name, params[i].tensor.shape(), adam.second_moments()[i]);
    const auto state = trainer->state();
    meta["trainer"] = state;
    meta["stage"] = state.at("stage");
    meta["epoch"] = state.at("epoch");
    meta["rng"] = state.at("rng");
  }
  meta["blobs"] = blobs;
  write_file(dir / "weights.bin", weights);
  write_file(dir / "checkpoint.json", meta.dump(2) + "\n");
}

Loaded load(const fs::path& dir) {
  Loaded out;
  const fs::path meta_path = dir / "checkpoint.json";
  try {
    out.metadata = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(meta_path.string() + ": invalid JSON: " + e.what());
  }
  const auto& meta = out.metadata;
  try {
    if (meta.at("format") != "ucsg-checkpoint") throw CheckpointError(meta_path.string() + ": not a checkpoint");
    if (meta.at("version") != kVersion)
      throw CheckpointError(meta_path.string() + ": unsupported version " + meta.at("version").dump());
    out.model_config = config::preset("desk_2d");
    config::apply_model(meta.at("model"), out.model_config);
    config::apply_train(meta.at("train"), out.train_config);
    out.model_config.validate();
    out.model = std::make_unique<net::Model>(out.model_config, 0);

    const std::string weights = read_file(dir / "weights.bin");
    if (weights.size() % 8 != 0) throw CheckpointError("weights.bin has a truncated value");
    const auto index = blob_index(meta, weights.size() / 8);
    for (auto& p : out.model->parameters()) {
      const auto it = index.find(p.name);
      if (it == index.end()) throw CheckpointError(meta_path.string() + ": missing parameter '" + p.name + "'");
      if (it->second.shape != nlohmann::json(p.tensor.shape()))
        throw CheckpointError(meta_path.string() + ": parameter '" + p.name + "' has shape " + it->second.shape.dump() +
                              ", expected " + nlohmann::json(p.tensor.shape()).dump());
      read_le(weights, it->second.offset, p.tensor.mutable_data());
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(meta_path.string() + ": malformed metadata: " + e.what());
  } catch (const config::ConfigError& e) {
    throw CheckpointError(meta_path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(meta_path.string() + ": " + e.what());
  }
  return out;
}

void restore_trainer(const fs::path& dir, const Loaded& loaded, train::Trainer& trainer) {
  const auto& meta = loaded.metadata;
  if (!meta.contains("trainer")) throw CheckpointError(dir.string() + ": checkpoint holds no training state");
  const std::string weights = read_file(dir / "weights.bin");
  try {
    const auto index = blob_index(meta, weights.size() / 8);
    auto& adam = trainer.optimizer();
    const auto& params = adam.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (const char* kind : {"adam.m/", "adam.v/"}) {
        const auto it = index.find(kind + params[i].name);
        if (it == index.end() || it->second.count != params[i].tensor.numel())
          throw CheckpointError(dir.string() + ": missing optimizer state for '" + params[i].name + "'");
        auto& target = std::string(kind) == "adam.m/" ? adam.first_moments()[i] : adam.second_moments()[i];
        read_le(weights, it->second.offset, target);
      }
    }
    trainer.restore_state(meta.at("trainer"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(dir.string() + ": malformed training state: " + e.what());
  }
}

}  // namespace ucsg::checkpoint
