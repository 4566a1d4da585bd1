// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Iso-contours of sampled fields: marching squares (2-D) and marching cubes
// (3-D), plus SVG and OBJ export.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ucsg/grid.hpp"

namespace ucsg::contour {

/// Scalar samples at the cell centers of a resolution^dim grid over
/// [-0.5, 0.5]^dim, plus one ring of cells outside it on every side.
/// Storage is x fastest over (resolution + 2)^dim samples. Inside is
/// value > iso.
struct Field {
  int dim = 2;
  std::size_t resolution = 0;
  std::vector<double> values;

  std::size_t padded() const { return resolution + 2; }
  /// Coordinate of padded sample index `k` along one axis.
  double coordinate(std::size_t k) const {
    return -0.5 + (static_cast<double>(k) - 0.5) / static_cast<double>(resolution);
  }
};

/// Occupancy field of a binary grid; the outer ring is empty.
Field occupancy_field(const Grid& grid);
/// Samples `inside` (positive inside, e.g. a negated signed distance) at every
/// padded cell center.
Field sampled_field(int dim, std::size_t resolution, const std::function<double(const double*)>& inside);

/// Closed 2-D loops with the inside to the left (counter-clockwise outer
/// boundaries, clockwise holes).
struct Contour {
  std::vector<std::vector<std::array<double, 2>>> loops;

  std::size_t vertex_count() const;
  double length() const;
};

struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  double area() const;
};

/// Throws std::invalid_argument for a 3-D field or resolution < 8.
Contour marching_squares(const Field& field, double iso = 0.5);
/// Throws std::invalid_argument for a 2-D field or resolution < 8.
Mesh marching_cubes(const Field& field, double iso = 0.5);

/// Filled SVG of the loops (even-odd rule), `size` pixels square, y up.
std::string to_svg(const Contour& contour, std::size_t size);
std::string to_obj(const Mesh& mesh);

}  // namespace ucsg::contour
