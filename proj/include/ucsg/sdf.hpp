// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Analytic signed distances of the primitive kinds under rigid transforms.
// Coordinates live in the normalized domain [-0.5, 0.5]^dim.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ucsg/autodiff.hpp"

namespace ucsg::sdf {

enum class PrimitiveKind { Rectangle, Circle, Box, Sphere };

/// Shape parameters below this value are raised to it before evaluation.
inline constexpr double kMinShapeParam = 1e-4;

int spatial_dim(PrimitiveKind kind);
/// Number of shape parameters the kind actually reads.
std::size_t param_count(PrimitiveKind kind);
std::string_view kind_name(PrimitiveKind kind);
std::optional<PrimitiveKind> kind_from_name(std::string_view name);

/// Per-primitive slot widths of the decoder head for a given dimension:
/// shape params (widest kind), translation, rotation.
std::size_t param_slots(int dim);
std::size_t rotation_slots(int dim);

using Point2 = std::array<double, 2>;
using Point3 = std::array<double, 3>;
using Quaternion = std::array<double, 4>;  // (w, x, y, z)

/// q^-1 (x - t) with q a rotation by `theta` radians.
Point2 transform_point(const Point2& x, const Point2& t, double theta);
/// q^-1 (x - t); `q` is normalized internally, a zero quaternion is identity.
Point3 transform_point(const Point3& x, const Point3& t, const Quaternion& q);

double sdf_rectangle(const Point2& x, const Point2& half_extents);
double sdf_circle(const Point2& x, double radius);
double sdf_box(const Point3& x, const Point3& half_extents);
double sdf_sphere(const Point3& x, double radius);

/// One concrete primitive. `params` holds param_count(kind) values,
/// `translation` spatial_dim(kind) values, `rotation` one angle (2-D) or a
/// quaternion (3-D).
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Circle;
  std::vector<double> params;
  std::vector<double> translation;
  std::vector<double> rotation;

  bool operator==(const Primitive&) const = default;
};

/// Signed distance of `point` to `prim`, shape parameters floored at
/// kMinShapeParam.
double signed_distance(const Primitive& prim, std::span<const double> point);

/// Predicted primitives for a batch: M primitives per sample.
struct PrimitiveSet {
  std::vector<PrimitiveKind> kinds;  // length M
  ad::Tensor params;                 // [B, M, param_slots(dim)]
  ad::Tensor translation;            // [B, M, dim]
  ad::Tensor rotation;               // [B, M, rotation_slots(dim)]

  std::size_t batch() const { return params.size(0); }
  std::size_t count() const { return kinds.size(); }
  int dim() const;
  /// Concrete primitive `index` of sample `sample`.
  Primitive primitive(std::size_t sample, std::size_t index) const;
};

/// D[b, i, j] = signed distance of point i to primitive j of sample b.
/// points: [P, dim]. Differentiable w.r.t. params, translation, rotation and
/// the points themselves.
ad::Tensor eval_primitive_batch(const ad::Tensor& points, const PrimitiveSet& prims);

}  // namespace ucsg::sdf
