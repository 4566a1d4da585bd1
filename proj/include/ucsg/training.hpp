// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Point sampling, loss terms, Adam and the two-stage training loop.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucsg/autodiff.hpp"
#include "ucsg/grid.hpp"
#include "ucsg/network.hpp"
#include "ucsg/rng.hpp"
#include "ucsg/sdf.hpp"

namespace ucsg::train {

enum class SamplingMode { Exhaustive, BoundaryBiased };

struct TrainConfig {
  double lambda_translation = 0.1;
  double lambda_alpha = 0.1;
  double lambda_tau = 0.1;
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  std::size_t batch_size = 16;
  double epsilon = 1e-5;         // floor for alpha and every tau
  double stage_trigger = 0.05;   // stage 2 starts once alpha <= this
  std::size_t patience = 40;     // epochs without improvement before stopping
  double min_improvement = 1e-6;
  std::size_t max_epochs = 1000;
  SamplingMode sampling = SamplingMode::Exhaustive;
  std::size_t sample_count = 4096;  // points per batch in boundary-biased mode
  double boundary_fraction = 0.75;  // share of boundary-biased samples near the surface
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on inconsistent values.
  void validate(double alpha_init) const;
};

struct SampleBatch {
  ad::Tensor points;     // [P, dim]
  ad::Tensor occupancy;  // [P], values in {0, 1}
};

/// Exhaustive: every cell center. Boundary-biased: `count` points, a
/// `boundary_fraction` share jittered within one cell of a boundary cell and
/// the rest uniform over the domain. Ground truth is read from the cell
/// containing each point. Throws std::invalid_argument on an empty grid.
SampleBatch sample_points(const Grid& grid, SamplingMode mode, std::size_t count, Rng& rng,
                          double boundary_fraction = 0.75);

ad::Tensor loss_mse(const ad::Tensor& predicted, const ad::Tensor& target);
/// Sum of max(-p, 0) over the shape parameters each primitive reads, averaged
/// over the batch.
ad::Tensor loss_param_positivity(const sdf::PrimitiveSet& prims);
/// Sum over primitives of max(|t|^2, 0.5), averaged over the batch.
ad::Tensor loss_translation(const sdf::PrimitiveSet& prims);

struct LossTerms {
  ad::Tensor mse;
  ad::Tensor positivity;
  ad::Tensor translation;
  ad::Tensor alpha;
  std::vector<ad::Tensor> taus;
};

/// Stage 1: mse + positivity + lambda_T * translation + lambda_alpha * |alpha|.
/// Stage 2 adds lambda_tau * sum |tau|.
ad::Tensor loss_total(int stage, const LossTerms& terms, const TrainConfig& config);

class Adam {
 public:
  Adam(std::vector<net::Parameter> params, double lr, double beta1, double beta2, double eps);

  /// Applies one update from the accumulated gradients, then zeroes them.
  void step();
  std::size_t steps() const { return t_; }

  const std::vector<net::Parameter>& parameters() const { return params_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_steps(std::size_t t) { t_ = t; }

 private:
  std::vector<net::Parameter> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

/// Raised when the loss becomes NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  int stage = 1;          // stage the epoch was trained in
  double loss_total = 0.0;
  double loss_mse = 0.0;
  double loss_positivity = 0.0;
  double loss_translation = 0.0;
  double alpha = 0.0;
  std::vector<double> taus;
  std::size_t steps = 0;
  bool improved = false;

  nlohmann::json to_json() const;
};

struct StepRecord {
  std::size_t step = 0;
  int stage = 1;
  double loss = 0.0;
  double alpha = 0.0;
  std::vector<double> taus;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int final_stage = 1;
  std::size_t stage_flip_epoch = 0;  // epoch after which stage 2 began, 0 if never
  std::string stop_reason;           // "early_stop" or "max_epochs"
};

/// Model input tensor [B, 1, R, R(, R)] for the given dataset indices.
ad::Tensor batch_input(const std::vector<Grid>& data, const std::vector<std::size_t>& indices);

class Trainer {
 public:
  Trainer(net::Model& model, const std::vector<Grid>& data, TrainConfig config);

  EpochRecord run_epoch();
  /// Runs epochs until early stopping or max_epochs.
  TrainReport train();

  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const StepRecord&)> on_step;

  int stage() const { return stage_; }
  std::size_t epoch() const { return epoch_; }
  Rng& rng() { return rng_; }
  Adam& optimizer() { return adam_; }
  const Adam& optimizer() const { return adam_; }
  const TrainConfig& config() const { return config_; }

  /// Training state beyond the model weights, for checkpoints.
  nlohmann::json state() const;
  void restore_state(const nlohmann::json& state);

 private:
  double train_step(const std::vector<std::size_t>& indices, EpochRecord& acc);
  void clamp_schedule_parameters();

  net::Model& model_;
  const std::vector<Grid>& data_;
  TrainConfig config_;
  Adam adam_;
  Rng rng_;
  int stage_ = 1;
  std::size_t epoch_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t since_best_ = 0;
  std::size_t flip_epoch_ = 0;
  ad::Tensor exhaustive_points_;
};

}  // namespace ucsg::train
