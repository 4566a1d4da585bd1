// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Occupancy-valued CSG: signed distances are mapped to [0, 1] by a learnable
// slope and combined with clipped sums and differences.

#pragma once

#include "ucsg/autodiff.hpp"

namespace ucsg::occupancy {

struct OccupancyBatch {
  ad::Tensor values;  // same shape as the distances, all entries in [0, 1]
  double alpha_snapshot = 0.0;
};

/// [1 - D / alpha] clipped to [0, 1]. `alpha` is a positive scalar tensor.
OccupancyBatch to_occupancy(const ad::Tensor& distances, const ad::Tensor& alpha);

ad::Tensor csg_union(const ad::Tensor& a, const ad::Tensor& b);      // [a + b]
ad::Tensor csg_intersect(const ad::Tensor& a, const ad::Tensor& b);  // [a + b - 1]
ad::Tensor csg_diff(const ad::Tensor& a, const ad::Tensor& b);       // [a - b]

}  // namespace ucsg::occupancy
