// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// The CSG network: convolutional encoder, primitive parameter decoder with
// one head per primitive kind, stacked CSG layers with Gumbel-Softmax operand
// selection, and GRU-based latent updates between layers.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ucsg/autodiff.hpp"
#include "ucsg/rng.hpp"
#include "ucsg/sdf.hpp"

namespace ucsg::net {

struct EncoderConfig {
  int dim = 2;
  std::size_t resolution = 64;
  std::vector<std::size_t> channels = {32, 64, 128, 256, 256};
  std::vector<std::size_t> paddings = {1, 1, 1, 1, 0};
  std::size_t kernel = 4;
  std::size_t stride = 2;
  double slope = 0.01;

  /// Spatial extent after the conv stack; throws if a layer does not fit.
  std::size_t output_extent() const;
  /// Flattened encoder output size, i.e. the latent size d_z.
  std::size_t latent_size() const;
};

struct DecoderConfig {
  std::vector<std::size_t> hidden = {512, 1024, 2048};
  std::vector<sdf::PrimitiveKind> kinds = {sdf::PrimitiveKind::Circle, sdf::PrimitiveKind::Rectangle};
  std::size_t per_kind = 16;

  std::size_t primitive_count() const { return kinds.size() * per_kind; }
  /// d_p + d_t + d_q for the given dimension.
  static std::size_t tuple_width(int dim);
  /// Output width of every per-kind head.
  std::size_t head_width(int dim) const { return per_kind * tuple_width(dim); }
};

struct CsgConfig {
  /// Output count of every layer but the last; each a positive multiple of 4.
  /// The last layer always has a single node emitting the union.
  std::vector<std::size_t> layer_outputs = {16};
  double key_init_std = 0.1;
  double alpha_init = 1.0;
  double tau_init = 2.0;

  std::size_t layer_count() const { return layer_outputs.size() + 1; }
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  CsgConfig csg;

  /// 64x64 images, 16 circles + 16 rectangles, two layers of 16 outputs.
  static ModelConfig paper_2d();
  /// 64^3 voxels, 32 spheres + 32 boxes, five layers.
  static ModelConfig paper_3d();
  /// Scaled-down 2-D model (M = 8, L = 2) that trains on one CPU core.
  static ModelConfig desk_2d();

  int dim() const { return encoder.dim; }
  std::size_t latent_size() const { return encoder.latent_size(); }
  std::size_t primitive_count() const { return decoder.primitive_count(); }
  /// Input count M_in of CSG layer `layer` (0-based).
  std::size_t layer_inputs(std::size_t layer) const;
  /// Operand-pair nodes of CSG layer `layer`.
  std::size_t layer_nodes(std::size_t layer) const;
  /// Channels emitted by CSG layer `layer`.
  std::size_t layer_emitted(std::size_t layer) const;

  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

enum class Mode { Train, Eval };

struct Parameter {
  std::string name;
  ad::Tensor tensor;
};

/// Gumbel-Softmax relaxation of categorical selection along the last axis.
/// Train: softmax((log_probs + g) / tau) with g ~ Gumbel(0, 1) drawn row-major
/// from `rng`. Eval: exact one-hot at the argmax, with no noise.
ad::Tensor gumbel_softmax(const ad::Tensor& log_probs, const ad::Tensor& tau, Mode mode, Rng& rng);

/// Operand selection of one CSG layer.
struct LayerSelection {
  ad::Tensor left;   // soft selections V^, [B, nodes, M_in]
  ad::Tensor right;
  ad::Tensor left_probs;  // V = softmax(K z), [B, nodes, M_in]
  ad::Tensor right_probs;
  std::vector<std::size_t> left_index;   // argmax of V per (sample, node)
  std::vector<std::size_t> right_index;

  std::size_t nodes() const { return left.size(1); }
  std::size_t inputs() const { return left.size(2); }
};

/// Applies all four occupancy operations to selected operand pairs.
/// occupancies: [B, P, M_in]; selections [B, nodes, M_in]. Returns
/// [B, P, 4 * nodes] with per-node channel order
/// (union, intersection, left - right, right - left), or [B, P, nodes] of
/// unions only when `union_only`.
ad::Tensor combine_operands(const ad::Tensor& occupancies, const ad::Tensor& left, const ad::Tensor& right,
                            bool union_only);

struct Linear {
  ad::Tensor weight;  // [out, in]
  ad::Tensor bias;    // [out]
  ad::Tensor operator()(const ad::Tensor& x) const { return ad::linear(x, weight, bias); }
};

/// Standard GRU cell (reset, update, candidate gate order).
struct GruCell {
  ad::Tensor weight_ih;  // [3H, in]
  ad::Tensor weight_hh;  // [3H, H]
  ad::Tensor bias_ih;    // [3H]
  ad::Tensor bias_hh;    // [3H]
  ad::Tensor operator()(const ad::Tensor& x, const ad::Tensor& h) const;
};

struct CsgLayerParams {
  ad::Tensor keys_left;   // [nodes, M_in, d_z]
  ad::Tensor keys_right;  // [nodes, M_in, d_z]
  ad::Tensor tau;         // []
  Linear info_hidden;     // h^(l); absent on the last layer
  Linear info_out;
};

struct ForwardResult {
  ad::Tensor occupancy;          // [B, P], output of the final union
  ad::Tensor initial_occupancy;  // [B, P, M]
  sdf::PrimitiveSet primitives;
  std::vector<LayerSelection> selections;
  std::vector<ad::Tensor> latents;  // z^(0) .. z^(L-1), each [B, d_z]
  ad::Tensor alpha;
  std::vector<ad::Tensor> taus;
};

class Model {
 public:
  explicit Model(ModelConfig config, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }

  ad::Tensor encode(const ad::Tensor& input) const;
  sdf::PrimitiveSet predict_primitives(const ad::Tensor& z) const;
  /// One CSG layer: returns the emitted occupancies and records selections.
  ad::Tensor csg_layer_forward(std::size_t layer, const ad::Tensor& occupancies, const ad::Tensor& z, Mode mode,
                               Rng& rng, LayerSelection& record) const;
  /// z^(l+1) from z^(l), the selections of layer l and the previous GRU hidden
  /// state (the learnable initial state for l = 0).
  ad::Tensor info_update(std::size_t layer, const ad::Tensor& z, const ad::Tensor& hidden,
                         const LayerSelection& record) const;

  /// input: [B, 1, R, R] (2-D) or [B, 1, R, R, R] (3-D) with values in [0, 1];
  /// points: [P, dim] in the normalized domain.
  ForwardResult forward(const ad::Tensor& input, const ad::Tensor& points, Mode mode, Rng& rng) const;

  std::vector<Parameter> parameters() const;
  ad::Tensor& alpha() { return alpha_; }
  const ad::Tensor& alpha() const { return alpha_; }
  std::vector<ad::Tensor> taus() const;

  std::vector<Linear>& decoder_layers() { return decoder_; }
  std::vector<Linear>& heads() { return heads_; }
  std::vector<CsgLayerParams>& csg_layers() { return layers_; }
  GruCell& gru() { return gru_; }
  ad::Tensor& gru_initial_state() { return h0_; }

 private:
  ModelConfig config_;
  std::vector<Linear> encoder_;  // conv weights [O, C, K, K(, K)] and biases
  std::vector<Linear> decoder_;
  std::vector<Linear> heads_;
  std::vector<CsgLayerParams> layers_;
  GruCell gru_;
  ad::Tensor h0_;
  ad::Tensor alpha_;
};

}  // namespace ucsg::net
