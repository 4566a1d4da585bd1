// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Model reconstructions and per-sample metric records.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucsg/grid.hpp"
#include "ucsg/network.hpp"
#include "ucsg/tree.hpp"

namespace ucsg::eval {

/// Eval-mode occupancy of each input at the cell centers of a grid of
/// `resolution`, thresholded at `threshold` (inside when >= threshold).
std::vector<Grid> predict(const net::Model& model, const std::vector<Grid>& inputs, std::size_t resolution,
                          double threshold = 0.5, std::size_t batch = 16);

struct SampleMetrics {
  std::string name;
  double accuracy = 0.0;       // prediction vs. target
  double iou = 0.0;            // prediction vs. target
  double soft_hard_iou = 0.0;  // prediction vs. rasterized extracted tree
  std::optional<double> chamfer;  // absent when either surface is empty
  std::size_t tree_nodes = 0;

  nlohmann::json to_json() const;
};

struct Options {
  std::size_t resolution = 64;     // grid for predictions and trees
  std::size_t surface_points = 4096;
  std::uint64_t seed = 0;          // surface sampling
  double threshold = 0.5;
};

struct Report {
  std::vector<SampleMetrics> samples;
  double mean_accuracy = 0.0;
  double mean_iou = 0.0;
  double mean_soft_hard_iou = 0.0;
  double min_soft_hard_iou = 0.0;
  std::optional<double> mean_chamfer;  // over samples with both surfaces

  nlohmann::json to_json() const;
};

/// Metrics of the model on each target grid. Targets must match the model
/// input resolution.
Report evaluate_model(const net::Model& model, const std::vector<Grid>& targets, const std::vector<std::string>& names,
                      const Options& options);

/// Metrics of a fixed tree against one target grid.
SampleMetrics evaluate_tree_against(const tree::CsgTree& tree, const Grid& target, const Options& options);

}  // namespace ucsg::eval
