// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Model and training configuration: presets, JSON form and TOML files.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "ucsg/network.hpp"
#include "ucsg/training.hpp"

namespace ucsg::config {

/// Invalid configuration file or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "paper_2d", "paper_3d" or "desk_2d".
net::ModelConfig preset(const std::string& name);

/// Flat key set: dim, resolution, channels, paddings, kernel, stride, slope,
/// hidden, kinds, per_kind, layer_outputs, key_init_std, alpha_init, tau_init.
nlohmann::json model_to_json(const net::ModelConfig& config);
/// Overrides the keys present in `j`; unknown keys raise ConfigError.
void apply_model(const nlohmann::json& j, net::ModelConfig& config);

nlohmann::json train_to_json(const train::TrainConfig& config);
void apply_train(const nlohmann::json& j, train::TrainConfig& config);

struct RunConfig {
  std::string preset = "desk_2d";
  net::ModelConfig model = net::ModelConfig::desk_2d();
  train::TrainConfig train;
  bool seed_set = false;  // train.seed was given explicitly
};

/// Top-level `preset` key, then [model] and [train] tables overriding it.
RunConfig parse_toml(const std::string& text, const std::string& source = "config");
RunConfig load_toml(const std::filesystem::path& path);

}  // namespace ucsg::config
