// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/occupancy.hpp"

#include <stdexcept>
#include <string>

namespace ucsg::occupancy {

namespace {

void require_same_shape(const char* op, const ad::Tensor& a, const ad::Tensor& b) {
  if (a.shape() != b.shape())
    throw ad::ShapeError(std::string(op) + ": incompatible shapes " + ad::to_string(a.shape()) + " and " +
                         ad::to_string(b.shape()));
}

}  // namespace

OccupancyBatch to_occupancy(const ad::Tensor& distances, const ad::Tensor& alpha) {
  if (alpha.numel() != 1) throw ad::ShapeError("to_occupancy: alpha must be a scalar, got " + ad::to_string(alpha.shape()));
  const double a = alpha.data()[0];
  if (!(a > 0.0)) throw std::invalid_argument("to_occupancy: alpha must be positive, got " + std::to_string(a));
  const ad::Tensor scaled = ad::div(distances, alpha.dim() == 0 ? alpha : ad::reshape(alpha, {}));
  return {ad::clamp(1.0 - scaled, 0.0, 1.0), a};
}

ad::Tensor csg_union(const ad::Tensor& a, const ad::Tensor& b) {
  require_same_shape("csg_union", a, b);
  return ad::clamp(a + b, 0.0, 1.0);
}

ad::Tensor csg_intersect(const ad::Tensor& a, const ad::Tensor& b) {
  require_same_shape("csg_intersect", a, b);
  return ad::clamp(a + b - 1.0, 0.0, 1.0);
}

ad::Tensor csg_diff(const ad::Tensor& a, const ad::Tensor& b) {
  require_same_shape("csg_diff", a, b);
  return ad::clamp(a - b, 0.0, 1.0);
}

}  // namespace ucsg::occupancy
