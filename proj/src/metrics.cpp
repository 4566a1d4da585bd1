// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ucsg::metrics {

namespace {

/// mean over `query` of the squared distance to the nearest point of `ref`,
/// using a sweep over `ref` sorted by its first coordinate.
double directed(const PointSet& query, const PointSet& ref) {
  const auto d = static_cast<std::size_t>(ref.dim);
  const std::size_t n = ref.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return ref.coords[x * d] < ref.coords[y * d]; });
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = ref.coords[order[i] * d];

  auto dist2 = [&](const double* a, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = a[k] - ref.coords[j * d + k];
      s += diff * diff;
    }
    return s;
  };

  double total = 0.0;
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double* a = &query.coords[q * d];
    const auto start = static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), a[0]) - keys.begin());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < n; ++i) {
      const double dx = keys[i] - a[0];
      if (dx * dx > best) break;
      best = std::min(best, dist2(a, order[i]));
    }
    for (std::size_t i = start; i-- > 0;) {
      const double dx = a[0] - keys[i];
      if (dx * dx > best) break;
      best = std::min(best, dist2(a, order[i]));
    }
    total += best;
  }
  return total / static_cast<double>(query.size());
}

double triangle_area(const std::array<double, 3>& a, const std::array<double, 3>& b, const std::array<double, 3>& c) {
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
}

void require_same(const Grid& a, const Grid& b, const char* op) {
  if (a.dim != b.dim || a.resolution != b.resolution)
    throw std::invalid_argument(std::string(op) + ": grids differ in size");
}

}  // namespace

double chamfer_distance(const PointSet& a, const PointSet& b) {
  if (a.dim != b.dim) throw std::invalid_argument("chamfer_distance: point sets differ in dimension");
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("chamfer_distance: empty point set");
  return directed(a, b) + directed(b, a);
}

PointSet sample_contour(const contour::Contour& contour, std::size_t n, Rng& rng) {
  std::vector<std::array<double, 4>> segs;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& loop : contour.loops)
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto& p = loop[i];
      const auto& q = loop[(i + 1) % loop.size()];
      const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
      if (len <= 0.0) continue;
      segs.push_back({p[0], p[1], q[0], q[1]});
      total += len;
      cumulative.push_back(total);
    }
  PointSet out{2, {}};
  if (segs.empty()) return out;
  out.coords.reserve(n * 2);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform(0.0, total);
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    idx = std::min(idx, segs.size() - 1);
    const double t = rng.uniform(0.0, 1.0);
    const auto& g = segs[idx];
    out.coords.push_back(g[0] + t * (g[2] - g[0]));
    out.coords.push_back(g[1] + t * (g[3] - g[1]));
  }
  return out;
}

PointSet sample_mesh(const contour::Mesh& mesh, std::size_t n, Rng& rng) {
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative.push_back(total);
  }
  PointSet out{3, {}};
  if (mesh.triangles.empty() || total <= 0.0) return out;
  out.coords.reserve(n * 3);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform(0.0, total);
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    idx = std::min(idx, mesh.triangles.size() - 1);
    const auto& tri = mesh.triangles[idx];
    const double r1 = std::sqrt(rng.uniform(0.0, 1.0)), r2 = rng.uniform(0.0, 1.0);
    const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    for (int d = 0; d < 3; ++d)
      out.coords.push_back(wa * mesh.vertices[tri[0]][d] + wb * mesh.vertices[tri[1]][d] +
                           wc * mesh.vertices[tri[2]][d]);
  }
  return out;
}

PointSet sample_raster(const Grid& grid, std::size_t n, Rng& rng) {
  std::vector<std::size_t> boundary;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.cells[i] && grid.on_boundary(i)) boundary.push_back(i);
  PointSet out{grid.dim, {}};
  if (boundary.empty()) return out;
  const auto d = static_cast<std::size_t>(grid.dim);
  out.coords.reserve(n * d);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t rem = boundary[rng.below(boundary.size())];
    for (std::size_t a = 0; a < d; ++a) {
      out.coords.push_back(grid.center(rem % grid.resolution));
      rem /= grid.resolution;
    }
  }
  return out;
}

PointSet sample_surface(const Grid& grid, std::size_t n, Rng& rng) {
  if (grid.resolution < 8) return sample_raster(grid, n, rng);
  const auto field = contour::occupancy_field(grid);
  if (grid.dim == 2) return sample_contour(contour::marching_squares(field), n, rng);
  return sample_mesh(contour::marching_cubes(field), n, rng);
}

double grid_iou(const Grid& a, const Grid& b) {
  require_same(a, b, "grid_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a.cells[i] && b.cells[i];
    uni += a.cells[i] || b.cells[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double occupancy_accuracy(const Grid& a, const Grid& b) {
  require_same(a, b, "occupancy_accuracy");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a.cells[i] == b.cells[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace ucsg::metrics
