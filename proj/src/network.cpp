// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ucsg/occupancy.hpp"

namespace ucsg::net {

namespace {

ad::Tensor uniform_param(ad::Shape shape, double bound, Rng& rng) {
  std::vector<double> v(ad::numel(shape));
  for (double& e : v) e = rng.uniform(-bound, bound);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

ad::Tensor normal_param(ad::Shape shape, double stddev, Rng& rng) {
  std::vector<double> v(ad::numel(shape));
  for (double& e : v) e = rng.normal(0.0, stddev);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = uniform_param({out, in}, bound, rng);
  l.bias = uniform_param({out}, bound, rng);
  return l;
}

std::size_t argmax_row(const double* row, std::size_t n) {
  return static_cast<std::size_t>(std::max_element(row, row + n) - row);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::size_t EncoderConfig::output_extent() const {
  if (channels.empty() || channels.size() != paddings.size())
    throw std::invalid_argument("encoder: channel and padding lists must be non-empty and of equal length");
  if (stride == 0) throw std::invalid_argument("encoder: stride must be positive");
  std::size_t r = resolution;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (r + 2 * paddings[i] < kernel)
      throw std::invalid_argument("encoder: layer " + std::to_string(i + 1) + " kernel does not fit a " +
                                  std::to_string(r) + "-wide input");
    r = (r + 2 * paddings[i] - kernel) / stride + 1;
  }
  return r;
}

std::size_t EncoderConfig::latent_size() const {
  std::size_t e = output_extent();
  std::size_t spatial = 1;
  for (int d = 0; d < dim; ++d) spatial *= e;
  return channels.back() * spatial;
}

std::size_t DecoderConfig::tuple_width(int dim) {
  return sdf::param_slots(dim) + static_cast<std::size_t>(dim) + sdf::rotation_slots(dim);
}

ModelConfig ModelConfig::paper_2d() { return ModelConfig{}; }

ModelConfig ModelConfig::paper_3d() {
  ModelConfig c;
  c.encoder.dim = 3;
  c.decoder.kinds = {sdf::PrimitiveKind::Sphere, sdf::PrimitiveKind::Box};
  c.decoder.per_kind = 32;
  c.csg.layer_outputs = {16, 16, 16, 16};
  return c;
}

ModelConfig ModelConfig::desk_2d() {
  ModelConfig c;
  c.encoder.channels = {16, 32, 64, 128, 128};
  c.decoder.hidden = {256, 512, 1024};
  c.decoder.per_kind = 4;
  c.csg.layer_outputs = {16};
  return c;
}

std::size_t ModelConfig::layer_emitted(std::size_t layer) const {
  return layer + 1 < csg.layer_count() ? csg.layer_outputs.at(layer) : 1;
}

std::size_t ModelConfig::layer_nodes(std::size_t layer) const {
  return layer + 1 < csg.layer_count() ? csg.layer_outputs.at(layer) / 4 : 1;
}

std::size_t ModelConfig::layer_inputs(std::size_t layer) const {
  return layer == 0 ? primitive_count() : layer_emitted(layer - 1) + primitive_count();
}

void ModelConfig::validate() const {
  if (encoder.dim != 2 && encoder.dim != 3) throw std::invalid_argument("model: dimension must be 2 or 3");
  if (encoder.resolution == 0) throw std::invalid_argument("model: resolution must be positive");
  if (latent_size() == 0) throw std::invalid_argument("model: empty latent code");
  if (decoder.kinds.empty() || decoder.per_kind == 0) throw std::invalid_argument("model: no primitives");
  for (auto k : decoder.kinds)
    if (sdf::spatial_dim(k) != encoder.dim)
      throw std::invalid_argument("model: primitive kind " + std::string(sdf::kind_name(k)) + " is not " +
                                  std::to_string(encoder.dim) + "-D");
  for (std::size_t n : csg.layer_outputs)
    if (n == 0 || n % 4 != 0) throw std::invalid_argument("model: CSG layer outputs must be positive multiples of 4");
  if (!(csg.alpha_init > 0.0) || !(csg.tau_init > 0.0))
    throw std::invalid_argument("model: alpha and tau must start positive");
}

// ---------------------------------------------------------------------------
// Selection and combination

ad::Tensor gumbel_softmax(const ad::Tensor& log_probs, const ad::Tensor& tau, Mode mode, Rng& rng) {
  const std::size_t cols = log_probs.shape().back();
  const std::size_t rows = log_probs.numel() / cols;
  if (mode == Mode::Eval) {
    std::vector<double> onehot(log_probs.numel(), 0.0);
    const auto v = log_probs.data();
    for (std::size_t r = 0; r < rows; ++r) onehot[r * cols + argmax_row(v.data() + r * cols, cols)] = 1.0;
    return ad::Tensor::from(log_probs.shape(), std::move(onehot));
  }
  if (!(tau.data()[0] > 0.0)) throw std::invalid_argument("gumbel_softmax: temperature must be positive");
  std::vector<double> noise(log_probs.numel());
  for (double& e : noise) e = rng.gumbel();
  const ad::Tensor perturbed = log_probs + ad::Tensor::from(log_probs.shape(), std::move(noise));
  return ad::softmax(ad::div(perturbed, tau.dim() == 0 ? tau : ad::reshape(tau, {})));
}

ad::Tensor combine_operands(const ad::Tensor& occupancies, const ad::Tensor& left, const ad::Tensor& right,
                            bool union_only) {
  const ad::Tensor a = ad::weighted_sum(occupancies, left);
  const ad::Tensor b = ad::weighted_sum(occupancies, right);
  if (union_only) return occupancy::csg_union(a, b);
  const std::size_t batch = a.size(0), points = a.size(1), nodes = a.size(2);
  const ad::Tensor ops = ad::stack({occupancy::csg_union(a, b), occupancy::csg_intersect(a, b),
                                    occupancy::csg_diff(a, b), occupancy::csg_diff(b, a)},
                                   3);
  return ad::reshape(ops, {batch, points, 4 * nodes});
}

ad::Tensor GruCell::operator()(const ad::Tensor& x, const ad::Tensor& h) const {
  const std::size_t hidden = h.size(1);
  const ad::Tensor gi = ad::linear(x, weight_ih, bias_ih);
  const ad::Tensor gh = ad::linear(h, weight_hh, bias_hh);
  auto part = [&](const ad::Tensor& t, std::size_t k) { return ad::slice(t, 1, k * hidden, hidden); };
  const ad::Tensor reset = ad::sigmoid(part(gi, 0) + part(gh, 0));
  const ad::Tensor update = ad::sigmoid(part(gi, 1) + part(gh, 1));
  const ad::Tensor candidate = ad::tanh(part(gi, 2) + reset * part(gh, 2));
  return (1.0 - update) * candidate + update * h;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const auto& enc = config_.encoder;
  const std::size_t k = enc.kernel;
  std::size_t in_ch = 1;
  for (std::size_t c : enc.channels) {
    ad::Shape shape = {c, in_ch, k, k};
    if (enc.dim == 3) shape.push_back(k);
    const std::size_t fan_in = ad::numel(shape) / c;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Linear conv;
    conv.weight = uniform_param(shape, bound, rng);
    conv.bias = uniform_param({c}, bound, rng);
    encoder_.push_back(std::move(conv));
    in_ch = c;
  }
  const std::size_t dz = config_.latent_size();
  std::size_t width = dz;
  for (std::size_t h : config_.decoder.hidden) {
    decoder_.push_back(make_linear(width, h, rng));
    width = h;
  }
  for (std::size_t i = 0; i < config_.decoder.kinds.size(); ++i)
    heads_.push_back(make_linear(width, config_.decoder.head_width(config_.dim()), rng));
  for (std::size_t l = 0; l < config_.csg.layer_count(); ++l) {
    CsgLayerParams p;
    const std::size_t nodes = config_.layer_nodes(l), inputs = config_.layer_inputs(l);
    p.keys_left = normal_param({nodes, inputs, dz}, config_.csg.key_init_std, rng);
    p.keys_right = normal_param({nodes, inputs, dz}, config_.csg.key_init_std, rng);
    p.tau = ad::Tensor::scalar(config_.csg.tau_init, true);
    if (l + 1 < config_.csg.layer_count()) {
      p.info_hidden = make_linear(2 * nodes * inputs, dz, rng);
      p.info_out = make_linear(dz, dz, rng);
    }
    layers_.push_back(std::move(p));
  }
  const double gb = 1.0 / std::sqrt(static_cast<double>(dz));
  gru_.weight_ih = uniform_param({3 * dz, 2 * dz}, gb, rng);
  gru_.weight_hh = uniform_param({3 * dz, dz}, gb, rng);
  gru_.bias_ih = uniform_param({3 * dz}, gb, rng);
  gru_.bias_hh = uniform_param({3 * dz}, gb, rng);
  h0_ = ad::Tensor::zeros({dz}, true);
  alpha_ = ad::Tensor::scalar(config_.csg.alpha_init, true);
}

std::vector<ad::Tensor> Model::taus() const {
  std::vector<ad::Tensor> out;
  for (const auto& l : layers_) out.push_back(l.tau);
  return out;
}

std::vector<Parameter> Model::parameters() const {
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    out.push_back({"encoder." + std::to_string(i) + ".weight", encoder_[i].weight});
    out.push_back({"encoder." + std::to_string(i) + ".bias", encoder_[i].bias});
  }
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    out.push_back({"decoder." + std::to_string(i) + ".weight", decoder_[i].weight});
    out.push_back({"decoder." + std::to_string(i) + ".bias", decoder_[i].bias});
  }
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    const std::string kind(sdf::kind_name(config_.decoder.kinds[i]));
    out.push_back({"head." + kind + ".weight", heads_[i].weight});
    out.push_back({"head." + kind + ".bias", heads_[i].bias});
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = "csg." + std::to_string(l) + ".";
    out.push_back({p + "keys_left", layers_[l].keys_left});
    out.push_back({p + "keys_right", layers_[l].keys_right});
    out.push_back({p + "tau", layers_[l].tau});
    if (layers_[l].info_hidden.weight.defined()) {
      out.push_back({p + "info_hidden.weight", layers_[l].info_hidden.weight});
      out.push_back({p + "info_hidden.bias", layers_[l].info_hidden.bias});
      out.push_back({p + "info_out.weight", layers_[l].info_out.weight});
      out.push_back({p + "info_out.bias", layers_[l].info_out.bias});
    }
  }
  out.push_back({"gru.weight_ih", gru_.weight_ih});
  out.push_back({"gru.weight_hh", gru_.weight_hh});
  out.push_back({"gru.bias_ih", gru_.bias_ih});
  out.push_back({"gru.bias_hh", gru_.bias_hh});
  out.push_back({"gru.initial_state", h0_});
  out.push_back({"alpha", alpha_});
  return out;
}

ad::Tensor Model::encode(const ad::Tensor& input) const {
  const auto& enc = config_.encoder;
  const std::size_t r = enc.resolution;
  ad::Shape expected = {input.dim() > 0 ? input.size(0) : 0, 1, r, r};
  if (enc.dim == 3) expected.push_back(r);
  if (input.shape() != expected || input.size(0) == 0)
    throw ad::ShapeError("encode: expected input of shape [B, 1" + std::string(enc.dim == 3 ? ", R, R, R" : ", R, R") +
                         "] with R = " + std::to_string(r) + ", got " + ad::to_string(input.shape()));
  ad::Tensor x = input;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    const ad::ConvParams cp{enc.stride, enc.paddings[i]};
    x = enc.dim == 2 ? ad::conv2d(x, encoder_[i].weight, encoder_[i].bias, cp)
                     : ad::conv3d(x, encoder_[i].weight, encoder_[i].bias, cp);
    x = ad::leaky_relu(x, enc.slope);
  }
  return ad::reshape(x, {input.size(0), config_.latent_size()});
}

sdf::PrimitiveSet Model::predict_primitives(const ad::Tensor& z) const {
  ad::Tensor h = z;
  for (const auto& layer : decoder_) h = ad::leaky_relu(layer(h), config_.encoder.slope);
  const int dim = config_.dim();
  const std::size_t batch = z.size(0), n = config_.decoder.per_kind, tw = DecoderConfig::tuple_width(dim);
  const std::size_t ps = sdf::param_slots(dim), rs = sdf::rotation_slots(dim), d = static_cast<std::size_t>(dim);
  std::vector<ad::Tensor> params, trans, rots;
  sdf::PrimitiveSet set;
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    const ad::Tensor out = ad::reshape(heads_[i](h), {batch, n, tw});
    params.push_back(ad::slice(out, 2, 0, ps));
    trans.push_back(ad::slice(out, 2, ps, d));
    rots.push_back(ad::slice(out, 2, ps + d, rs));
    set.kinds.insert(set.kinds.end(), n, config_.decoder.kinds[i]);
  }
  set.params = ad::concat(params, 1);
  set.translation = ad::concat(trans, 1);
  set.rotation = ad::concat(rots, 1);
  return set;
}

ad::Tensor Model::csg_layer_forward(std::size_t layer, const ad::Tensor& occupancies, const ad::Tensor& z, Mode mode,
                                    Rng& rng, LayerSelection& record) const {
  const auto& p = layers_.at(layer);
  const std::size_t nodes = config_.layer_nodes(layer), inputs = config_.layer_inputs(layer);
  const std::size_t batch = z.size(0), dz = config_.latent_size();
  if (occupancies.dim() != 3 || occupancies.size(2) != inputs || occupancies.size(0) != batch)
    throw ad::ShapeError("csg layer " + std::to_string(layer) + ": expected " + std::to_string(inputs) +
                         " input shapes, got occupancies " + ad::to_string(occupancies.shape()));
  auto side = [&](const ad::Tensor& keys, ad::Tensor& probs, std::vector<std::size_t>& index) {
    const ad::Tensor logits = ad::linear(z, ad::reshape(keys, {nodes * inputs, dz}), {});
    const ad::Tensor log_probs = ad::log_softmax(ad::reshape(logits, {batch, nodes, inputs}));
    probs = ad::exp(log_probs);
    index.resize(batch * nodes);
    const auto v = log_probs.data();
    for (std::size_t r = 0; r < batch * nodes; ++r) index[r] = argmax_row(v.data() + r * inputs, inputs);
    return gumbel_softmax(log_probs, p.tau, mode, rng);
  };
  record.left = side(p.keys_left, record.left_probs, record.left_index);
  record.right = side(p.keys_right, record.right_probs, record.right_index);
  return combine_operands(occupancies, record.left, record.right, layer + 1 == config_.csg.layer_count());
}

ad::Tensor Model::info_update(std::size_t layer, const ad::Tensor& z, const ad::Tensor& hidden,
                              const LayerSelection& record) const {
  const auto& p = layers_.at(layer);
  const std::size_t batch = z.size(0), width = record.nodes() * record.inputs();
  const ad::Tensor v = ad::concat({ad::reshape(record.left, {batch, width}), ad::reshape(record.right, {batch, width})}, 1);
  const ad::Tensor encoded = p.info_out(ad::leaky_relu(p.info_hidden(v), config_.encoder.slope));
  return gru_(ad::concat({z, encoded}, 1), hidden);
}

ForwardResult Model::forward(const ad::Tensor& input, const ad::Tensor& points, Mode mode, Rng& rng) const {
  ForwardResult r;
  const ad::Tensor z0 = encode(input);
  const std::size_t batch = z0.size(0), dz = config_.latent_size();
  r.primitives = predict_primitives(z0);
  r.alpha = alpha_;
  r.initial_occupancy = occupancy::to_occupancy(sdf::eval_primitive_batch(points, r.primitives), alpha_).values;
  ad::Tensor z = z0;
  ad::Tensor hidden = ad::broadcast_to(h0_, {batch, dz});
  ad::Tensor current = r.initial_occupancy;
  const std::size_t layers = config_.csg.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    r.latents.push_back(z);
    r.taus.push_back(layers_[l].tau);
    LayerSelection record;
    const ad::Tensor out = csg_layer_forward(l, current, z, mode, rng, record);
    if (l + 1 < layers) {
      z = info_update(l, z, hidden, record);
      hidden = z;
      current = ad::concat({out, r.initial_occupancy}, 2);
    } else {
      r.occupancy = ad::reshape(out, {out.size(0), out.size(1)});
    }
    r.selections.push_back(std::move(record));
  }
  return r;
}

}  // namespace ucsg::net
