// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ucsg::sdf {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Quaternion normalized(const Quaternion& q, double* norm_out = nullptr) {
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (norm_out) *norm_out = n;
  if (n < 1e-12) return {1.0, 0.0, 0.0, 0.0};
  return {q[0] / n, q[1] / n, q[2] / n, q[3] / n};
}

Mat3 rotation_matrix(const Quaternion& u) {
  const auto [w, x, y, z] = u;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

// dR/dw, dR/dx, dR/dy, dR/dz of rotation_matrix at unit quaternion u.
std::array<Mat3, 4> rotation_partials(const Quaternion& u) {
  const auto [w, x, y, z] = u;
  return {{{{{0, -2 * z, 2 * y}, {2 * z, 0, -2 * x}, {-2 * y, 2 * x, 0}}},
           {{{0, 2 * y, 2 * z}, {2 * y, -4 * x, -2 * w}, {2 * z, 2 * w, -4 * x}}},
           {{{-4 * y, 2 * x, 2 * w}, {2 * x, 0, 2 * z}, {-2 * w, 2 * z, -4 * y}}},
           {{{-4 * z, -2 * w, 2 * x}, {2 * w, -4 * z, 2 * y}, {2 * x, 2 * y, 0}}}}};
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Signed distance in local coordinates plus its gradients w.r.t. the local
// point and the (floored) shape parameters.
struct LocalEval {
  double d = 0.0;
  std::array<double, 3> d_local{};
  std::array<double, 3> d_param{};
};

template <std::size_t N>
LocalEval eval_box_like(const std::array<double, N>& l, const double* p, std::uint64_t& branch) {
  std::array<double, N> q{};
  double outside = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < N; ++i) {
    q[i] = std::abs(l[i]) - p[i];
    if (q[i] > 0.0) outside += q[i] * q[i];
    if (q[i] > q[arg]) arg = i;
  }
  LocalEval r;
  if (outside > 0.0) {
    const double n = std::sqrt(outside);
    r.d = n;
    for (std::size_t i = 0; i < N; ++i) {
      const double dq = q[i] > 0.0 ? q[i] / n : 0.0;
      r.d_local[i] = dq * sign(l[i]);
      r.d_param[i] = -dq;
      branch = branch * 3 + (q[i] > 0.0 ? 1 : 2);
    }
  } else {
    r.d = q[arg];
    r.d_local[arg] = sign(l[arg]);
    r.d_param[arg] = -1.0;
    branch = branch * 7 + 5 + arg;
  }
  for (std::size_t i = 0; i < N; ++i) branch = branch * 3 + (l[i] > 0.0 ? 1 : (l[i] < 0.0 ? 2 : 0));
  return r;
}

template <std::size_t N>
LocalEval eval_round(const std::array<double, N>& l, double radius) {
  double s = 0.0;
  for (double v : l) s += v * v;
  const double n = std::sqrt(s);
  LocalEval r;
  r.d = n - radius;
  if (n > 0.0)
    for (std::size_t i = 0; i < N; ++i) r.d_local[i] = l[i] / n;
  r.d_param[0] = -1.0;
  return r;
}

}  // namespace

int spatial_dim(PrimitiveKind kind) {
  return kind == PrimitiveKind::Rectangle || kind == PrimitiveKind::Circle ? 2 : 3;
}

std::size_t param_count(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Rectangle: return 2;
    case PrimitiveKind::Box: return 3;
    case PrimitiveKind::Circle:
    case PrimitiveKind::Sphere: return 1;
  }
  return 0;
}

std::string_view kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Rectangle: return "rectangle";
    case PrimitiveKind::Circle: return "circle";
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Sphere: return "sphere";
  }
  return "unknown";
}

std::optional<PrimitiveKind> kind_from_name(std::string_view name) {
  for (auto k : {PrimitiveKind::Rectangle, PrimitiveKind::Circle, PrimitiveKind::Box, PrimitiveKind::Sphere})
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

std::size_t param_slots(int dim) { return dim == 2 ? 2 : 3; }
std::size_t rotation_slots(int dim) { return dim == 2 ? 1 : 4; }

Point2 transform_point(const Point2& x, const Point2& t, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double dx = x[0] - t[0], dy = x[1] - t[1];
  return {c * dx + s * dy, -s * dx + c * dy};
}

Point3 transform_point(const Point3& x, const Point3& t, const Quaternion& q) {
  const Mat3 r = rotation_matrix(normalized(q));
  const Point3 d = {x[0] - t[0], x[1] - t[1], x[2] - t[2]};
  Point3 out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = r[0][i] * d[0] + r[1][i] * d[1] + r[2][i] * d[2];
  return out;
}

double sdf_rectangle(const Point2& x, const Point2& half_extents) {
  const double qx = std::abs(x[0]) - half_extents[0];
  const double qy = std::abs(x[1]) - half_extents[1];
  const double ox = std::max(qx, 0.0), oy = std::max(qy, 0.0);
  return std::sqrt(ox * ox + oy * oy) + std::min(std::max(qx, qy), 0.0);
}

double sdf_circle(const Point2& x, double radius) { return std::hypot(x[0], x[1]) - radius; }

double sdf_box(const Point3& x, const Point3& half_extents) {
  const double qx = std::abs(x[0]) - half_extents[0];
  const double qy = std::abs(x[1]) - half_extents[1];
  const double qz = std::abs(x[2]) - half_extents[2];
  const double ox = std::max(qx, 0.0), oy = std::max(qy, 0.0), oz = std::max(qz, 0.0);
  return std::sqrt(ox * ox + oy * oy + oz * oz) + std::min(std::max(qx, std::max(qy, qz)), 0.0);
}

double sdf_sphere(const Point3& x, double radius) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - radius; }

double signed_distance(const Primitive& prim, std::span<const double> point) {
  const int dim = spatial_dim(prim.kind);
  if (point.size() != static_cast<std::size_t>(dim) || prim.translation.size() != point.size() ||
      prim.params.size() < param_count(prim.kind) || prim.rotation.size() != rotation_slots(dim))
    throw std::invalid_argument("signed_distance: dimension mismatch for " + std::string(kind_name(prim.kind)));
  auto p = [&](std::size_t i) { return std::max(prim.params[i], kMinShapeParam); };
  if (prim.kind == PrimitiveKind::Circle)
    return sdf_circle({point[0] - prim.translation[0], point[1] - prim.translation[1]}, p(0));
  if (prim.kind == PrimitiveKind::Sphere)
    return sdf_sphere({point[0] - prim.translation[0], point[1] - prim.translation[1], point[2] - prim.translation[2]},
                      p(0));
  if (dim == 2) {
    const Point2 l = transform_point({point[0], point[1]}, {prim.translation[0], prim.translation[1]}, prim.rotation[0]);
    return prim.kind == PrimitiveKind::Rectangle ? sdf_rectangle(l, {p(0), p(1)}) : sdf_circle(l, p(0));
  }
  const Point3 l = transform_point({point[0], point[1], point[2]},
                                   {prim.translation[0], prim.translation[1], prim.translation[2]},
                                   {prim.rotation[0], prim.rotation[1], prim.rotation[2], prim.rotation[3]});
  return prim.kind == PrimitiveKind::Box ? sdf_box(l, {p(0), p(1), p(2)}) : sdf_sphere(l, p(0));
}

int PrimitiveSet::dim() const {
  if (kinds.empty()) throw std::invalid_argument("PrimitiveSet: no primitives");
  return spatial_dim(kinds.front());
}

Primitive PrimitiveSet::primitive(std::size_t sample, std::size_t index) const {
  const int d = dim();
  const std::size_t ps = param_slots(d), rs = rotation_slots(d), m = count();
  Primitive prim;
  prim.kind = kinds.at(index);
  const auto pv = params.data().subspan((sample * m + index) * ps, ps);
  prim.params.assign(pv.begin(), pv.begin() + static_cast<std::ptrdiff_t>(param_count(prim.kind)));
  const auto tv = translation.data().subspan((sample * m + index) * d, d);
  prim.translation.assign(tv.begin(), tv.end());
  const auto rv = rotation.data().subspan((sample * m + index) * rs, rs);
  prim.rotation.assign(rv.begin(), rv.end());
  return prim;
}

namespace {

struct BatchLayout {
  std::size_t batch, points, count, dim, pslots, rslots;
};

// Evaluates one (sample, point, primitive) triple. When `grads` is set,
// accumulates upstream gradient `g` into the parameter/translation/rotation/
// point buffers (any of which may be empty).
struct Evaluator {
  const BatchLayout& lay;
  const std::vector<PrimitiveKind>& kinds;
  const double* pts;
  const double* params;
  const double* trans;
  const double* rot;

  double run(std::size_t b, std::size_t i, std::size_t j, double g, std::span<double> gp, std::span<double> gt,
             std::span<double> gr, std::span<double> gx) const {
    const std::size_t prim = b * lay.count + j;
    const double* x = pts + i * lay.dim;
    const double* t = trans + prim * lay.dim;
    const double* r = rot + prim * lay.rslots;
    const double* praw = params + prim * lay.pslots;
    const PrimitiveKind kind = kinds[j];
    std::array<double, 3> p{};
    std::uint64_t branch = static_cast<std::uint64_t>(kind) + 1;
    for (std::size_t k = 0; k < param_count(kind); ++k) {
      p[k] = std::max(praw[k], kMinShapeParam);
      branch = branch * 2 + (praw[k] > kMinShapeParam ? 1 : 0);
    }
    LocalEval e;
    if (lay.dim == 2) {
      const bool rotated = kind == PrimitiveKind::Rectangle;
      const double c = rotated ? std::cos(r[0]) : 1.0, s = rotated ? std::sin(r[0]) : 0.0;
      const double dx = x[0] - t[0], dy = x[1] - t[1];
      const std::array<double, 2> l = {c * dx + s * dy, -s * dx + c * dy};
      e = kind == PrimitiveKind::Rectangle ? eval_box_like<2>(l, p.data(), branch) : eval_round<2>(l, p[0]);
      if (g != 0.0) {
        const double g0 = g * e.d_local[0], g1 = g * e.d_local[1];
        // d(local)/d(x) = R(-theta); its transpose maps local gradients back.
        const double wx = c * g0 - s * g1, wy = s * g0 + c * g1;
        if (!gt.empty()) {
          gt[prim * 2] -= wx;
          gt[prim * 2 + 1] -= wy;
        }
        if (!gx.empty()) {
          gx[i * 2] += wx;
          gx[i * 2 + 1] += wy;
        }
        if (!gr.empty() && kind == PrimitiveKind::Rectangle) gr[prim] += g0 * l[1] - g1 * l[0];
      }
    } else {
      double qnorm = 0.0;
      const Quaternion u = kind == PrimitiveKind::Box ? normalized({r[0], r[1], r[2], r[3]}, &qnorm)
                                                      : Quaternion{1.0, 0.0, 0.0, 0.0};
      const Mat3 rm = rotation_matrix(u);
      const std::array<double, 3> d = {x[0] - t[0], x[1] - t[1], x[2] - t[2]};
      std::array<double, 3> l{};
      for (std::size_t a = 0; a < 3; ++a) l[a] = rm[0][a] * d[0] + rm[1][a] * d[1] + rm[2][a] * d[2];
      e = kind == PrimitiveKind::Box ? eval_box_like<3>(l, p.data(), branch) : eval_round<3>(l, p[0]);
      if (g != 0.0) {
        std::array<double, 3> gl = {g * e.d_local[0], g * e.d_local[1], g * e.d_local[2]};
        std::array<double, 3> gd{};
        for (std::size_t a = 0; a < 3; ++a) gd[a] = rm[a][0] * gl[0] + rm[a][1] * gl[1] + rm[a][2] * gl[2];
        for (std::size_t a = 0; a < 3; ++a) {
          if (!gt.empty()) gt[prim * 3 + a] -= gd[a];
          if (!gx.empty()) gx[i * 3 + a] += gd[a];
        }
        if (!gr.empty() && kind == PrimitiveKind::Box && qnorm >= 1e-12) {
          const auto partials = rotation_partials(u);
          std::array<double, 4> gu{};
          for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t a = 0; a < 3; ++a)
              for (std::size_t bb = 0; bb < 3; ++bb) gu[k] += d[a] * partials[k][a][bb] * gl[bb];
          const double dot = gu[0] * u[0] + gu[1] * u[1] + gu[2] * u[2] + gu[3] * u[3];
          for (std::size_t k = 0; k < 4; ++k) gr[prim * 4 + k] += (gu[k] - u[k] * dot) / qnorm;
        }
      }
    }
    if (g != 0.0 && !gp.empty())
      for (std::size_t k = 0; k < param_count(kind); ++k)
        if (praw[k] > kMinShapeParam) gp[prim * lay.pslots + k] += g * e.d_param[k];
    if (g == 0.0) ad::note_branch(branch);
    return e.d;
  }
};

}  // namespace

ad::Tensor eval_primitive_batch(const ad::Tensor& points, const PrimitiveSet& prims) {
  const int d = prims.dim();
  for (auto k : prims.kinds)
    if (spatial_dim(k) != d) throw std::invalid_argument("eval_primitive_batch: mixed 2-D and 3-D primitive kinds");
  if (points.dim() != 2 || points.size(1) != static_cast<std::size_t>(d))
    throw ad::ShapeError("eval_primitive_batch: points " + ad::to_string(points.shape()) + " do not match " +
                         std::to_string(d) + "-D primitives");
  const std::size_t b = prims.params.size(0), m = prims.count();
  const ad::Shape ps = {b, m, param_slots(d)}, ts = {b, m, static_cast<std::size_t>(d)},
                  rs = {b, m, rotation_slots(d)};
  if (prims.params.shape() != ps || prims.translation.shape() != ts || prims.rotation.shape() != rs)
    throw ad::ShapeError("eval_primitive_batch: primitive tensors " + ad::to_string(prims.params.shape()) + ", " +
                         ad::to_string(prims.translation.shape()) + ", " + ad::to_string(prims.rotation.shape()) +
                         " do not match " + std::to_string(m) + " primitives");
  auto layout = std::make_shared<BatchLayout>(BatchLayout{b, points.size(0), m, static_cast<std::size_t>(d),
                                                          param_slots(d), rotation_slots(d)});
  auto kinds = std::make_shared<std::vector<PrimitiveKind>>(prims.kinds);
  std::vector<double> out(b * layout->points * m);
  {
    Evaluator ev{*layout, *kinds, points.data().data(), prims.params.data().data(),
                 prims.translation.data().data(), prims.rotation.data().data()};
    for (std::size_t s = 0; s < b; ++s)
      for (std::size_t i = 0; i < layout->points; ++i)
        for (std::size_t j = 0; j < m; ++j) out[(s * layout->points + i) * m + j] = ev.run(s, i, j, 0.0, {}, {}, {}, {});
  }
  return ad::make_result(
      "sdf_primitives", {b, layout->points, m}, std::move(out),
      {points, prims.params, prims.translation, prims.rotation}, [layout, kinds](ad::Node& self) {
        Evaluator ev{*layout, *kinds, self.inputs[0]->value.data(), self.inputs[1]->value.data(),
                     self.inputs[2]->value.data(), self.inputs[3]->value.data()};
        auto gx = ad::input_grad(self, 0);
        auto gp = ad::input_grad(self, 1);
        auto gt = ad::input_grad(self, 2);
        auto gr = ad::input_grad(self, 3);
        const std::size_t n = layout->points, m = layout->count;
        for (std::size_t s = 0; s < layout->batch; ++s)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
              const double g = self.grad[(s * n + i) * m + j];
              if (g != 0.0) ev.run(s, i, j, g, gp, gt, gr, gx);
            }
      });
}

}  // namespace ucsg::sdf
