// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ucsg::train {

void TrainConfig::validate(double alpha_init) const {
  if (lambda_translation < 0 || lambda_alpha < 0 || lambda_tau < 0)
    throw std::invalid_argument("train: loss weights must be non-negative");
  if (!(learning_rate > 0)) throw std::invalid_argument("train: learning rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw std::invalid_argument("train: Adam betas must lie in [0, 1)");
  if (batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  if (!(epsilon > 0)) throw std::invalid_argument("train: epsilon must be positive");
  if (!(stage_trigger > 0 && stage_trigger < alpha_init))
    throw std::invalid_argument("train: stage trigger must lie in (0, alpha_init)");
  if (sampling == SamplingMode::BoundaryBiased && sample_count == 0)
    throw std::invalid_argument("train: sample count must be positive");
  if (!(boundary_fraction >= 0 && boundary_fraction <= 1))
    throw std::invalid_argument("train: boundary fraction must lie in [0, 1]");
}

SampleBatch sample_points(const Grid& grid, SamplingMode mode, std::size_t count, Rng& rng,
                          double boundary_fraction) {
  if (grid.filled() == 0) throw std::invalid_argument("sample_points: shape has no interior cells");
  const auto d = static_cast<std::size_t>(grid.dim);
  if (mode == SamplingMode::Exhaustive) {
    std::vector<double> occ(grid.cells.begin(), grid.cells.end());
    return {ad::Tensor::from({grid.size(), d}, grid.centers()), ad::Tensor::from({grid.size()}, std::move(occ))};
  }
  std::vector<std::size_t> boundary;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.on_boundary(i)) boundary.push_back(i);
  const double cell = 1.0 / static_cast<double>(grid.resolution);
  std::vector<double> pts;
  std::vector<double> occ;
  pts.reserve(count * d);
  occ.reserve(count);
  const auto near = static_cast<std::size_t>(std::llround(boundary_fraction * static_cast<double>(count)));
  for (std::size_t s = 0; s < count; ++s) {
    double p[3];
    if (s < near && !boundary.empty()) {
      std::size_t rem = boundary[rng.below(boundary.size())];
      for (std::size_t a = 0; a < d; ++a) {
        p[a] = std::clamp(grid.center(rem % grid.resolution) + rng.uniform(-cell, cell), -0.5, 0.5);
        rem /= grid.resolution;
      }
    } else {
      for (std::size_t a = 0; a < d; ++a) p[a] = rng.uniform(-0.5, 0.5);
    }
    pts.insert(pts.end(), p, p + d);
    occ.push_back(grid.at_point(p));
  }
  return {ad::Tensor::from({count, d}, std::move(pts)), ad::Tensor::from({count}, std::move(occ))};
}

ad::Tensor loss_mse(const ad::Tensor& predicted, const ad::Tensor& target) {
  if (predicted.shape() != target.shape())
    throw ad::ShapeError("loss_mse: incompatible shapes " + ad::to_string(predicted.shape()) + " and " +
                         ad::to_string(target.shape()));
  return ad::mean(ad::square(predicted - target));
}

ad::Tensor loss_param_positivity(const sdf::PrimitiveSet& prims) {
  const std::size_t m = prims.count(), slots = prims.params.size(2);
  std::vector<double> mask(m * slots, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < sdf::param_count(prims.kinds[j]); ++k) mask[j * slots + k] = 1.0;
  const ad::Tensor negative = ad::max_with_const(-prims.params, 0.0);
  const ad::Tensor used = negative * ad::Tensor::from({1, m, slots}, std::move(mask));
  return ad::sum(used) * (1.0 / static_cast<double>(prims.batch()));
}

ad::Tensor loss_translation(const sdf::PrimitiveSet& prims) {
  const ad::Tensor sq = ad::sum(ad::square(prims.translation), 2);
  return ad::sum(ad::max_with_const(sq, 0.5)) * (1.0 / static_cast<double>(prims.batch()));
}

ad::Tensor loss_total(int stage, const LossTerms& terms, const TrainConfig& config) {
  ad::Tensor total = terms.mse + terms.positivity + terms.translation * config.lambda_translation +
                     ad::abs(terms.alpha) * config.lambda_alpha;
  if (stage == 2)
    for (const auto& tau : terms.taus) total = total + ad::abs(tau) * config.lambda_tau;
  return total;
}

// ---------------------------------------------------------------------------

Adam::Adam(std::vector<net::Parameter> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Tensor& t = params_[i].tensor;
    const auto g = t.grad();
    auto w = t.mutable_data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.empty() ? 0.0 : g[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
      w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
    t.zero_grad();
  }
}

// ---------------------------------------------------------------------------

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"stage", stage},
          {"loss_total", loss_total},
          {"loss_mse", loss_mse},
          {"loss_positivity", loss_positivity},
          {"loss_translation", loss_translation},
          {"alpha", alpha},
          {"tau", taus},
          {"steps", steps},
          {"improved", improved}};
}

ad::Tensor batch_input(const std::vector<Grid>& data, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("batch_input: empty batch");
  const Grid& first = data.at(indices.front());
  const std::size_t n = first.size(), r = first.resolution;
  std::vector<double> v;
  v.reserve(indices.size() * n);
  for (std::size_t i : indices) {
    const Grid& g = data.at(i);
    if (g.dim != first.dim || g.resolution != r)
      throw std::invalid_argument("batch_input: grids of differing size in one batch");
    v.insert(v.end(), g.cells.begin(), g.cells.end());
  }
  ad::Shape shape = {indices.size(), 1, r, r};
  if (first.dim == 3) shape.push_back(r);
  return ad::Tensor::from(std::move(shape), std::move(v));
}

Trainer::Trainer(net::Model& model, const std::vector<Grid>& data, TrainConfig config)
    : model_(model),
      data_(data),
      config_(config),
      adam_(model.parameters(), config.learning_rate, config.beta1, config.beta2, config.adam_eps),
      rng_(config.seed) {
  config_.validate(model.config().csg.alpha_init);
  if (data_.empty()) throw std::invalid_argument("train: dataset is empty");
  const auto& enc = model.config().encoder;
  for (const auto& g : data_)
    if (g.dim != enc.dim || g.resolution != enc.resolution)
      throw std::invalid_argument("train: dataset grids do not match the model input resolution");
  if (config_.sampling == SamplingMode::Exhaustive) {
    const auto d = static_cast<std::size_t>(enc.dim);
    exhaustive_points_ = ad::Tensor::from({data_.front().size(), d}, data_.front().centers());
  }
}

void Trainer::clamp_schedule_parameters() {
  auto floor = [&](ad::Tensor t) {
    auto v = t.mutable_data();
    v[0] = std::max(v[0], config_.epsilon);
  };
  floor(model_.alpha());
  for (auto& tau : model_.taus()) floor(tau);
}

double Trainer::train_step(const std::vector<std::size_t>& indices, EpochRecord& acc) {
  const ad::Tensor input = batch_input(data_, indices);
  ad::Tensor points;
  std::vector<double> target;
  if (config_.sampling == SamplingMode::Exhaustive) {
    points = exhaustive_points_;
    for (std::size_t i : indices) target.insert(target.end(), data_[i].cells.begin(), data_[i].cells.end());
  } else {
    const std::size_t per = std::max<std::size_t>(1, config_.sample_count / indices.size());
    std::vector<double> pts;
    for (std::size_t i : indices) {
      const auto s = sample_points(data_[i], SamplingMode::BoundaryBiased, per, rng_, config_.boundary_fraction);
      pts.insert(pts.end(), s.points.data().begin(), s.points.data().end());
    }
    const auto d = static_cast<std::size_t>(data_.front().dim);
    points = ad::Tensor::from({pts.size() / d, d}, pts);
    for (std::size_t i : indices)
      for (std::size_t p = 0; p < pts.size() / d; ++p) target.push_back(data_[i].at_point(&pts[p * d]));
  }
  const std::size_t count = points.size(0);

  double loss_value;
  {
    ad::Tape tape;
    const auto out = model_.forward(input, points, net::Mode::Train, rng_);
    LossTerms terms{loss_mse(out.occupancy, ad::Tensor::from({indices.size(), count}, std::move(target))),
                    loss_param_positivity(out.primitives), loss_translation(out.primitives), out.alpha, out.taus};
    const ad::Tensor total = loss_total(stage_, terms, config_);
    loss_value = total.item();
    if (!std::isfinite(loss_value))
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch_ + 1) + ", step " +
                            std::to_string(adam_.steps() + 1) + ": loss " + std::to_string(loss_value) +
                            " (mse " + std::to_string(terms.mse.item()) + ", alpha " +
                            std::to_string(model_.alpha().item()) + ")");
    tape.backward(total);
    acc.loss_total += loss_value;
    acc.loss_mse += terms.mse.item();
    acc.loss_positivity += terms.positivity.item();
    acc.loss_translation += terms.translation.item();
  }
  adam_.step();
  clamp_schedule_parameters();
  if (on_step) {
    StepRecord s{adam_.steps(), stage_, loss_value, model_.alpha().item(), {}};
    for (const auto& t : model_.taus()) s.taus.push_back(t.item());
    on_step(s);
  }
  return loss_value;
}

EpochRecord Trainer::run_epoch() {
  EpochRecord rec;
  rec.epoch = epoch_ + 1;
  rec.stage = stage_;
  std::vector<std::size_t> order(data_.size());
  std::iota(order.begin(), order.end(), 0);
  rng_.shuffle(order.begin(), order.end());
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    train_step({order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end)},
               rec);
    ++rec.steps;
  }
  const double n = static_cast<double>(rec.steps);
  rec.loss_total /= n;
  rec.loss_mse /= n;
  rec.loss_positivity /= n;
  rec.loss_translation /= n;
  rec.alpha = model_.alpha().item();
  for (const auto& t : model_.taus()) rec.taus.push_back(t.item());
  ++epoch_;

  if (!has_best_ || rec.loss_total <= best_ - config_.min_improvement) {
    best_ = rec.loss_total;
    has_best_ = true;
    since_best_ = 0;
    rec.improved = true;
  } else {
    ++since_best_;
  }
  if (stage_ == 1 && rec.alpha <= config_.stage_trigger) {
    stage_ = 2;
    flip_epoch_ = epoch_;
    has_best_ = false;
    since_best_ = 0;
  }
  if (on_epoch) on_epoch(rec);
  return rec;
}

TrainReport Trainer::train() {
  TrainReport report;
  report.stop_reason = "max_epochs";
  while (epoch_ < config_.max_epochs) {
    report.epochs.push_back(run_epoch());
    if (since_best_ >= config_.patience) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  report.final_stage = stage_;
  report.stage_flip_epoch = flip_epoch_;
  return report;
}

nlohmann::json Trainer::state() const {
  return {{"stage", stage_},
          {"epoch", epoch_},
          {"best_loss", best_},
          {"has_best", has_best_},
          {"epochs_since_best", since_best_},
          {"stage_flip_epoch", flip_epoch_},
          {"optimizer_steps", adam_.steps()},
          {"rng", rng_.serialize()}};
}

void Trainer::restore_state(const nlohmann::json& s) {
  stage_ = s.at("stage").get<int>();
  epoch_ = s.at("epoch").get<std::size_t>();
  best_ = s.at("best_loss").get<double>();
  has_best_ = s.at("has_best").get<bool>();
  since_best_ = s.at("epochs_since_best").get<std::size_t>();
  flip_epoch_ = s.at("stage_flip_epoch").get<std::size_t>();
  adam_.set_steps(s.at("optimizer_steps").get<std::size_t>());
  rng_.deserialize(s.at("rng").get<std::string>());
}

}  // namespace ucsg::train
