// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// 2-D and 3-D convolution through im2col + GEMM. A 2-D convolution is run as
// a 3-D one with unit depth and a depth-1 kernel.

#include <Eigen/Core>

#include <array>

#include "ucsg/autodiff.hpp"

namespace ucsg::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct Geometry {
  std::size_t batch = 0, in_ch = 0, out_ch = 0;
  std::array<std::size_t, 3> in{};      // D, H, W
  std::array<std::size_t, 3> kernel{};  // KD, KH, KW
  std::array<std::size_t, 3> pad{};
  std::array<std::size_t, 3> out{};
  std::size_t stride = 1;

  std::size_t in_spatial() const { return in[0] * in[1] * in[2]; }
  std::size_t out_spatial() const { return out[0] * out[1] * out[2]; }
  std::size_t patch() const { return in_ch * kernel[0] * kernel[1] * kernel[2]; }
};

// Calls f(row, col, src) for every in-bounds (patch row, output position,
// input offset) triple of one sample.
template <typename F>
void for_each_tap(const Geometry& g, F&& f) {
  const auto [kd, kh, kw] = g.kernel;
  const std::size_t cols = g.out_spatial();
  for (std::size_t c = 0; c < g.in_ch; ++c)
    for (std::size_t a = 0; a < kd; ++a)
      for (std::size_t b = 0; b < kh; ++b)
        for (std::size_t e = 0; e < kw; ++e) {
          const std::size_t row = ((c * kd + a) * kh + b) * kw + e;
          for (std::size_t od = 0; od < g.out[0]; ++od) {
            const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(od * g.stride + a) - static_cast<std::ptrdiff_t>(g.pad[0]);
            if (id < 0 || id >= static_cast<std::ptrdiff_t>(g.in[0])) continue;
            for (std::size_t oh = 0; oh < g.out[1]; ++oh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + b) - static_cast<std::ptrdiff_t>(g.pad[1]);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in[1])) continue;
              for (std::size_t ow = 0; ow < g.out[2]; ++ow) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + e) - static_cast<std::ptrdiff_t>(g.pad[2]);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in[2])) continue;
                const std::size_t col = (od * g.out[1] + oh) * g.out[2] + ow;
                const std::size_t src = ((c * g.in[0] + static_cast<std::size_t>(id)) * g.in[1] +
                                         static_cast<std::size_t>(ih)) * g.in[2] + static_cast<std::size_t>(iw);
                f(row * cols + col, src);
              }
            }
          }
        }
}

void im2col(const Geometry& g, const double* x, double* col) {
  std::fill_n(col, g.patch() * g.out_spatial(), 0.0);
  for_each_tap(g, [&](std::size_t dst, std::size_t src) { col[dst] = x[src]; });
}

void col2im(const Geometry& g, const double* col, double* gx) {
  for_each_tap(g, [&](std::size_t dst, std::size_t src) { gx[src] += col[dst]; });
}

Tensor conv_nd(const char* op, const Tensor& x, const Tensor& weight, const Tensor& bias, const Geometry& g) {
  const std::size_t patch = g.patch();
  const std::size_t cols = g.out_spatial();
  const std::size_t in_size = g.in_ch * g.in_spatial();
  const std::size_t out_size = g.out_ch * cols;
  std::vector<double> out(g.batch * out_size);
  std::vector<double> col(patch * cols);
  ConstMapMat w(weight.data().data(), g.out_ch, patch);
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(g, x.data().data() + n * in_size, col.data());
    MapMat y(out.data() + n * out_size, g.out_ch, cols);
    y.noalias() = w * ConstMapMat(col.data(), patch, cols);
    if (bias.defined()) y.colwise() += Eigen::Map<const Eigen::VectorXd>(bias.data().data(), g.out_ch);
  }
  Shape out_shape = {g.batch, g.out_ch};
  const bool three_d = x.dim() == 5;
  for (std::size_t d = three_d ? 0 : 1; d < 3; ++d) out_shape.push_back(g.out[d]);
  return make_result(op, std::move(out_shape), std::move(out), {x, weight, bias},
                     [g, patch, cols, in_size, out_size](Node& self) {
                       auto gx = input_grad(self, 0);
                       auto gw = input_grad(self, 1);
                       std::span<double> gb;
                       if (self.inputs[2]) gb = input_grad(self, 2);
                       const double* xv = self.inputs[0]->value.data();
                       ConstMapMat w(self.inputs[1]->value.data(), g.out_ch, patch);
                       std::vector<double> col(patch * cols);
                       std::vector<double> gcol(gx.empty() ? 0 : patch * cols);
                       for (std::size_t n = 0; n < g.batch; ++n) {
                         ConstMapMat go(self.grad.data() + n * out_size, g.out_ch, cols);
                         if (!gw.empty()) {
                           im2col(g, xv + n * in_size, col.data());
                           MapMat(gw.data(), g.out_ch, patch).noalias() +=
                               go * ConstMapMat(col.data(), patch, cols).transpose();
                         }
                         if (!gb.empty()) Eigen::Map<Eigen::VectorXd>(gb.data(), g.out_ch) += go.rowwise().sum();
                         if (!gx.empty()) {
                           MapMat(gcol.data(), patch, cols).noalias() = w.transpose() * go;
                           col2im(g, gcol.data(), gx.data() + n * in_size);
                         }
                       }
                     });
}

std::size_t out_extent(const char* op, std::size_t in, std::size_t k, std::size_t pad, std::size_t stride) {
  if (in + 2 * pad < k)
    throw ShapeError(std::string(op) + ": kernel " + std::to_string(k) + " larger than padded input " +
                     std::to_string(in + 2 * pad));
  return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvParams params) {
  if (x.dim() != 4 || weight.dim() != 4 || x.size(1) != weight.size(1))
    throw ShapeError("conv2d: incompatible shapes " + to_string(x.shape()) + " and " + to_string(weight.shape()));
  if (bias.defined() && (bias.dim() != 1 || bias.size(0) != weight.size(0)))
    throw ShapeError("conv2d: incompatible shapes " + to_string(weight.shape()) + " and " + to_string(bias.shape()));
  if (params.stride == 0) throw ShapeError("conv2d: stride must be positive");
  Geometry g;
  g.batch = x.size(0);
  g.in_ch = x.size(1);
  g.out_ch = weight.size(0);
  g.in = {1, x.size(2), x.size(3)};
  g.kernel = {1, weight.size(2), weight.size(3)};
  g.pad = {0, params.padding, params.padding};
  g.stride = params.stride;
  g.out = {1, out_extent("conv2d", g.in[1], g.kernel[1], g.pad[1], g.stride),
           out_extent("conv2d", g.in[2], g.kernel[2], g.pad[2], g.stride)};
  return conv_nd("conv2d", x, weight, bias, g);
}

Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvParams params) {
  if (x.dim() != 5 || weight.dim() != 5 || x.size(1) != weight.size(1))
    throw ShapeError("conv3d: incompatible shapes " + to_string(x.shape()) + " and " + to_string(weight.shape()));
  if (bias.defined() && (bias.dim() != 1 || bias.size(0) != weight.size(0)))
    throw ShapeError("conv3d: incompatible shapes " + to_string(weight.shape()) + " and " + to_string(bias.shape()));
  if (params.stride == 0) throw ShapeError("conv3d: stride must be positive");
  Geometry g;
  g.batch = x.size(0);
  g.in_ch = x.size(1);
  g.out_ch = weight.size(0);
  g.in = {x.size(2), x.size(3), x.size(4)};
  g.kernel = {weight.size(2), weight.size(3), weight.size(4)};
  g.pad = {params.padding, params.padding, params.padding};
  g.stride = params.stride;
  for (std::size_t d = 0; d < 3; ++d) g.out[d] = out_extent("conv3d", g.in[d], g.kernel[d], g.pad[d], g.stride);
  return conv_nd("conv3d", x, weight, bias, g);
}

}  // namespace ucsg::ad
