// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/contour.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "marching_tables.hpp"

namespace ucsg::contour {

namespace {

void require(const Field& f, int dim, const char* op) {
  if (f.dim != dim)
    throw std::invalid_argument(std::string(op) + ": expected a " + std::to_string(dim) + "-D field");
  if (f.resolution < 8) throw std::invalid_argument(std::string(op) + ": resolution must be at least 8");
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= f.padded();
  if (f.values.size() != n) throw std::invalid_argument(std::string(op) + ": field has the wrong number of samples");
}

double crossing(double a, double b, double iso) { return (iso - a) / (b - a); }

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Field occupancy_field(const Grid& grid) {
  Field f{grid.dim, grid.resolution, {}};
  const std::size_t p = f.padded(), r = grid.resolution;
  f.values.assign(grid.dim == 3 ? p * p * p : p * p, 0.0);
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    std::size_t rem = flat, out = 0, stride = 1;
    for (int a = 0; a < grid.dim; ++a) {
      out += (rem % r + 1) * stride;
      rem /= r;
      stride *= p;
    }
    f.values[out] = grid.cells[flat];
  }
  return f;
}

Field sampled_field(int dim, std::size_t resolution, const std::function<double(const double*)>& inside) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("sampled_field: dimension must be 2 or 3");
  Field f{dim, resolution, {}};
  const std::size_t p = f.padded();
  const std::size_t n = dim == 3 ? p * p * p : p * p;
  f.values.resize(n);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    double x[3];
    for (int a = 0; a < dim; ++a) {
      x[a] = f.coordinate(rem % p);
      rem /= p;
    }
    f.values[flat] = inside(x);
  }
  return f;
}

std::size_t Contour::vertex_count() const {
  std::size_t n = 0;
  for (const auto& l : loops) n += l.size();
  return n;
}

double Contour::length() const {
  double total = 0.0;
  for (const auto& l : loops)
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto& a = l[i];
      const auto& b = l[(i + 1) % l.size()];
      total += std::hypot(b[0] - a[0], b[1] - a[1]);
    }
  return total;
}

double Mesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    const auto &a = vertices[t[0]], &b = vertices[t[1]], &c = vertices[t[2]];
    const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    total += 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Marching squares. Corners 0 (i, j), 1 (i+1, j), 2 (i+1, j+1), 3 (i, j+1);
// edge e joins corners e and (e + 1) % 4.

Contour marching_squares(const Field& field, double iso) {
  require(field, 2, "marching_squares");
  const std::size_t p = field.padded();
  auto value = [&](std::size_t i, std::size_t j) { return field.values[j * p + i]; };

  std::map<std::uint64_t, std::array<double, 2>> vertex;
  std::map<std::uint64_t, std::uint64_t> next;

  static constexpr int kCorner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (std::size_t j = 0; j + 1 < p; ++j)
    for (std::size_t i = 0; i + 1 < p; ++i) {
      double v[4];
      bool in[4];
      int code = 0;
      for (int c = 0; c < 4; ++c) {
        v[c] = value(i + kCorner[c][0], j + kCorner[c][1]);
        in[c] = v[c] > iso;
        code |= in[c] << c;
      }
      if (code == 0 || code == 15) continue;

      auto edge_key = [&](int e) -> std::uint64_t {
        // Horizontal edges (0, 2) keyed by their left corner, vertical (1, 3)
        // by their lower corner.
        const int c = (e == 0 || e == 3) ? 0 : (e == 1 ? 1 : 3);
        const std::uint64_t ci = i + kCorner[c][0], cj = j + kCorner[c][1];
        return ((cj * p + ci) << 1) | (e == 1 || e == 3 ? 1u : 0u);
      };
      auto edge_point = [&](int e) {
        const int a = e, b = (e + 1) % 4;
        const double t = crossing(v[a], v[b], iso);
        const double xa = field.coordinate(i + kCorner[a][0]), ya = field.coordinate(j + kCorner[a][1]);
        const double xb = field.coordinate(i + kCorner[b][0]), yb = field.coordinate(j + kCorner[b][1]);
        return std::array<double, 2>{xa + t * (xb - xa), ya + t * (yb - ya)};
      };

      std::vector<std::pair<int, int>> segments;
      const bool center_in = (v[0] + v[1] + v[2] + v[3]) / 4.0 > iso;
      if (code == 5) {
        if (center_in) segments = {{0, 1}, {2, 3}};
        else segments = {{3, 0}, {1, 2}};
      } else if (code == 10) {
        if (center_in) segments = {{1, 2}, {3, 0}};
        else segments = {{0, 1}, {2, 3}};
      } else {
        int found[2], n = 0;
        for (int e = 0; e < 4; ++e)
          if (in[e] != in[(e + 1) % 4]) found[n++] = e;
        segments = {{found[0], found[1]}};
      }

      for (auto [ea, eb] : segments) {
        const auto pa = edge_point(ea), pb = edge_point(eb);
        // Orient so that the inside lies to the left.
        int ref;
        if ((ea + 2) % 4 == eb) ref = in[0] ? 0 : (in[1] ? 1 : (in[2] ? 2 : 3));
        else ref = (eb == (ea + 1) % 4) ? eb : ea;  // corner shared by the two edges
        const double cx = field.coordinate(i + kCorner[ref][0]), cy = field.coordinate(j + kCorner[ref][1]);
        const double cross = (pb[0] - pa[0]) * (cy - pa[1]) - (pb[1] - pa[1]) * (cx - pa[0]);
        const bool forward = (cross > 0) == in[ref];
        const auto ka = edge_key(ea), kb = edge_key(eb);
        vertex[ka] = pa;
        vertex[kb] = pb;
        if (forward) next[ka] = kb;
        else next[kb] = ka;
      }
    }

  Contour out;
  std::map<std::uint64_t, bool> used;
  for (const auto& [start, unused] : next) {
    if (used[start]) continue;
    std::vector<std::array<double, 2>> loop;
    std::uint64_t k = start;
    while (!used[k]) {
      used[k] = true;
      loop.push_back(vertex.at(k));
      const auto it = next.find(k);
      if (it == next.end()) break;
      k = it->second;
    }
    out.loops.push_back(std::move(loop));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marching cubes.

Mesh marching_cubes(const Field& field, double iso) {
  require(field, 3, "marching_cubes");
  const std::size_t p = field.padded();
  auto index = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * p + j) * p + i; };

  static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                        {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  static constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                       {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

  Mesh mesh;
  std::unordered_map<std::uint64_t, std::size_t> ids;
  for (std::size_t k = 0; k + 1 < p; ++k)
    for (std::size_t j = 0; j + 1 < p; ++j)
      for (std::size_t i = 0; i + 1 < p; ++i) {
        double v[8];
        int code = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = field.values[index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])];
          if (v[c] > iso) code |= 1 << c;
        }
        if (code == 0 || code == 255) continue;

        auto vertex_id = [&](int e) {
          int a = kEdge[e][0], b = kEdge[e][1];
          // Key each edge by its lower lattice corner and axis.
          int lo = a, axis = 0;
          for (int d = 0; d < 3; ++d)
            if (kCorner[a][d] != kCorner[b][d]) axis = d;
          if (kCorner[b][axis] < kCorner[a][axis]) lo = b;
          const std::uint64_t key =
              index(i + kCorner[lo][0], j + kCorner[lo][1], k + kCorner[lo][2]) * 3 + static_cast<std::uint64_t>(axis);
          const auto it = ids.find(key);
          if (it != ids.end()) return it->second;
          const double t = crossing(v[a], v[b], iso);
          std::array<double, 3> pt;
          const std::size_t base[3] = {i, j, k};
          for (int d = 0; d < 3; ++d) {
            const double xa = field.coordinate(base[d] + kCorner[a][d]);
            const double xb = field.coordinate(base[d] + kCorner[b][d]);
            pt[d] = xa + t * (xb - xa);
          }
          mesh.vertices.push_back(pt);
          ids.emplace(key, mesh.vertices.size() - 1);
          return mesh.vertices.size() - 1;
        };

        const auto& row = detail::kTriTable[code];
        for (int t = 0; row[t] != -1; t += 3)
          mesh.triangles.push_back({vertex_id(row[t]), vertex_id(row[t + 1]), vertex_id(row[t + 2])});
      }
  return mesh;
}

// ---------------------------------------------------------------------------

std::string to_svg(const Contour& contour, std::size_t size) {
  const double s = static_cast<double>(size);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
                    std::to_string(size) + "\" viewBox=\"0 0 " + std::to_string(size) + " " + std::to_string(size) +
                    "\">\n";
  out += "<path fill=\"black\" fill-rule=\"evenodd\" d=\"";
  bool first = true;
  for (const auto& loop : contour.loops) {
    if (loop.empty()) continue;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (!first) out += ' ';
      first = false;
      out += i == 0 ? "M" : "L";
      out += number((loop[i][0] + 0.5) * s) + " " + number((0.5 - loop[i][1]) * s);
    }
    out += " Z";
  }
  out += "\"/>\n</svg>\n";
  return out;
}

std::string to_obj(const Mesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) out += "v " + number(v[0]) + " " + number(v[1]) + " " + number(v[2]) + "\n";
  for (const auto& t : mesh.triangles)
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  return out;
}

}  // namespace ucsg::contour
