// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Dense binary occupancy grids over the normalized domain [-0.5, 0.5]^dim.
// Cell (i, j[, k]) is stored row-major with the last index along x.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ucsg {

struct Grid {
  int dim = 2;
  std::size_t resolution = 0;
  std::vector<std::uint8_t> cells;  // 0 or 1

  Grid() = default;
  Grid(int d, std::size_t r) : dim(d), resolution(r), cells(cell_count(d, r), 0) {}

  static std::size_t cell_count(int d, std::size_t r) { return d == 3 ? r * r * r : r * r; }
  std::size_t size() const { return cells.size(); }
  std::size_t filled() const {
    std::size_t n = 0;
    for (auto c : cells) n += c;
    return n;
  }

  /// Center coordinate of cell index `i` along one axis.
  double center(std::size_t i) const {
    return -0.5 + (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
  }
  /// Cell index along one axis containing coordinate `x` (clamped to the grid).
  std::size_t index_of(double x) const {
    const double f = (x + 0.5) * static_cast<double>(resolution);
    if (f <= 0.0) return 0;
    const auto i = static_cast<std::size_t>(f);
    return i >= resolution ? resolution - 1 : i;
  }

  /// Occupancy of the cell containing `point` (dim coordinates).
  std::uint8_t at_point(const double* point) const {
    std::size_t flat = 0;
    for (int a = dim - 1; a >= 0; --a) flat = flat * resolution + index_of(point[a]);
    return cells[flat];
  }

  /// Cell centers in storage order, `dim` coordinates per cell (x first).
  std::vector<double> centers() const {
    std::vector<double> out;
    out.reserve(size() * static_cast<std::size_t>(dim));
    const std::size_t r = resolution;
    for (std::size_t flat = 0; flat < size(); ++flat) {
      std::size_t rem = flat;
      double c[3];
      for (int a = 0; a < dim; ++a) {
        c[a] = center(rem % r);
        rem /= r;
      }
      for (int a = 0; a < dim; ++a) out.push_back(c[a]);
    }
    return out;
  }

  /// True when the cell differs from at least one axis neighbour (cells
  /// outside the grid count as empty).
  bool on_boundary(std::size_t flat) const {
    const std::size_t r = resolution;
    std::size_t idx[3] = {0, 0, 0}, rem = flat, stride[3] = {1, r, r * r};
    for (int a = 0; a < dim; ++a) {
      idx[a] = rem % r;
      rem /= r;
    }
    const auto v = cells[flat];
    for (int a = 0; a < dim; ++a) {
      const std::uint8_t lo = idx[a] == 0 ? 0 : cells[flat - stride[a]];
      const std::uint8_t hi = idx[a] + 1 == r ? 0 : cells[flat + stride[a]];
      if (lo != v || hi != v) return true;
    }
    return false;
  }

  bool operator==(const Grid&) const = default;
};

}  // namespace ucsg
