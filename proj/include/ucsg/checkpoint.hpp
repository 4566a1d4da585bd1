// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint directories: checkpoint.json (metadata) and weights.bin
// (little-endian 64-bit float blobs: model parameters, then Adam moments).

#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>

#include "json.hpp"
#include "ucsg/network.hpp"
#include "ucsg/training.hpp"

namespace ucsg::checkpoint {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the model and, when given, the trainer state and optimizer moments.
void save(const std::filesystem::path& dir, const net::Model& model, const train::TrainConfig& train_config,
          const train::Trainer* trainer = nullptr);

struct Loaded {
  nlohmann::json metadata;
  net::ModelConfig model_config;
  train::TrainConfig train_config;
  std::unique_ptr<net::Model> model;
};

/// Rebuilds the model with the stored weights. Throws CheckpointError.
Loaded load(const std::filesystem::path& dir);

/// Restores optimizer moments and loop state saved alongside a trainer.
/// `trainer` must wrap `loaded.model`.
void restore_trainer(const std::filesystem::path& dir, const Loaded& loaded, train::Trainer& trainer);

}  // namespace ucsg::checkpoint
