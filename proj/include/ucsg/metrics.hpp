// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Reconstruction metrics: Chamfer distance, surface sampling, grid IoU and
// occupancy accuracy.

#pragma once

#include <cstddef>
#include <vector>

#include "ucsg/contour.hpp"
#include "ucsg/grid.hpp"
#include "ucsg/rng.hpp"

namespace ucsg::metrics {

struct PointSet {
  int dim = 2;
  std::vector<double> coords;  // dim values per point

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
};

/// mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2. Throws
/// std::invalid_argument on an empty set or mismatched dimensions.
double chamfer_distance(const PointSet& a, const PointSet& b);

/// Length-weighted samples on the contour segments.
PointSet sample_contour(const contour::Contour& contour, std::size_t n, Rng& rng);
/// Area-weighted samples on the mesh triangles.
PointSet sample_mesh(const contour::Mesh& mesh, std::size_t n, Rng& rng);
/// Centers of uniformly drawn boundary cells.
PointSet sample_raster(const Grid& grid, std::size_t n, Rng& rng);
/// Contours the grid and samples the result; falls back to boundary cells
/// when the grid is too small to contour. Empty grids yield no points.
PointSet sample_surface(const Grid& grid, std::size_t n, Rng& rng);

/// |A and B| / |A or B|; 1 when both grids are empty.
double grid_iou(const Grid& a, const Grid& b);
/// Fraction of cells with equal occupancy.
double occupancy_accuracy(const Grid& a, const Grid& b);

}  // namespace ucsg::metrics
