// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "ucsg/autodiff.hpp"
#include "ucsg/network.hpp"
#include "ucsg/rng.hpp"

namespace ucsg::testing {

/// 16x16 input, d_z = 16, 4 circles + 4 rectangles (M = 8), two CSG layers.
inline net::ModelConfig small_config() {
  net::ModelConfig c = net::ModelConfig::desk_2d();
  c.encoder.resolution = 16;
  c.encoder.channels = {4, 8, 8, 16};
  c.encoder.paddings = {1, 1, 1, 1};
  c.decoder.hidden = {16, 16, 16};
  c.decoder.per_kind = 4;
  c.csg.layer_outputs = {8};
  return c;
}

/// Pixel centers of an R x R grid over [-0.5, 0.5]^2, row-major, as [R*R, 2].
inline ad::Tensor grid_points_2d(std::size_t r) {
  std::vector<double> v;
  v.reserve(r * r * 2);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      v.push_back(-0.5 + (static_cast<double>(j) + 0.5) / static_cast<double>(r));
      v.push_back(-0.5 + (static_cast<double>(i) + 0.5) / static_cast<double>(r));
    }
  return ad::Tensor::from({r * r, 2}, std::move(v));
}

/// Random binary images [B, 1, R, R] made of one filled disk each.
inline ad::Tensor disk_images(std::size_t batch, std::size_t r, Rng& rng) {
  std::vector<double> v(batch * r * r, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double cx = rng.uniform(-0.2, 0.2), cy = rng.uniform(-0.2, 0.2), rad = rng.uniform(0.15, 0.3);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        const double x = -0.5 + (j + 0.5) / r - cx, y = -0.5 + (i + 0.5) / r - cy;
        v[(b * r + i) * r + j] = x * x + y * y <= rad * rad ? 1.0 : 0.0;
      }
  }
  return ad::Tensor::from({batch, 1, r, r}, std::move(v));
}

}  // namespace ucsg::testing
