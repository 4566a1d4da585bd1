// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "support/op_catalog.hpp"
#include "ucsg/occupancy.hpp"
#include "ucsg/sdf.hpp"

using namespace ucsg;
using ad::Tensor;

namespace {

double one(const Tensor& t) { return t.data()[0]; }
Tensor s(double v) { return Tensor::from({1}, {v}); }

}  // namespace

TEST_CASE("to_occupancy examples") {
  const auto alpha1 = Tensor::scalar(1.0);
  CHECK(one(occupancy::to_occupancy(s(0.0), alpha1).values) == 1.0);
  CHECK(std::abs(one(occupancy::to_occupancy(s(0.5), alpha1).values) - 0.5) <= 1e-15);
  CHECK(one(occupancy::to_occupancy(s(2.0), alpha1).values) == 0.0);
  CHECK(one(occupancy::to_occupancy(s(0.5), Tensor::scalar(0.01)).values) == 0.0);
  CHECK(occupancy::to_occupancy(s(0.5), Tensor::scalar(0.25)).alpha_snapshot == 0.25);
}

TEST_CASE("to_occupancy rejects non-positive alpha") {
  CHECK_THROWS_AS(occupancy::to_occupancy(s(0.1), Tensor::scalar(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(occupancy::to_occupancy(s(0.1), Tensor::scalar(-1.0)), std::invalid_argument);
  CHECK_THROWS_AS(occupancy::to_occupancy(s(0.1), Tensor::from({2}, {1, 1})), ad::ShapeError);
}

TEST_CASE("to_occupancy is monotone, in range and exact inside") {
  Rng rng(2);
  std::vector<double> d(1000);
  for (double& v : d) v = rng.uniform(-1, 1);
  std::sort(d.begin(), d.end());
  for (double a : {1.0, 0.3, 1e-3}) {
    const auto o = occupancy::to_occupancy(Tensor::from({d.size()}, d), Tensor::scalar(a)).values;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(o[i] >= 0.0);
      CHECK(o[i] <= 1.0);
      if (d[i] <= 0) CHECK(o[i] == 1.0);
      if (d[i] > 0) CHECK(o[i] < 1.0);
      if (i > 0) CHECK(o[i] <= o[i - 1]);
    }
  }
}

TEST_CASE("binary inputs follow Boolean set semantics") {
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b) {
      const auto A = s(a), B = s(b);
      CHECK(one(occupancy::csg_union(A, B)) == double(a || b));
      CHECK(one(occupancy::csg_intersect(A, B)) == double(a && b));
      CHECK(one(occupancy::csg_diff(A, B)) == double(a && !b));
      CHECK(one(occupancy::csg_diff(B, A)) == double(b && !a));
    }
}

TEST_CASE("soft value examples") {
  const auto A = s(0.6), B = s(0.7);
  CHECK(one(occupancy::csg_union(A, B)) == 1.0);
  CHECK(std::abs(one(occupancy::csg_intersect(A, B)) - 0.3) <= 1e-15);
  CHECK(one(occupancy::csg_diff(A, B)) == 0.0);
  CHECK(std::abs(one(occupancy::csg_diff(B, A)) - 0.1) <= 1e-15);
}

TEST_CASE("algebraic properties on soft values") {
  Rng rng(6);
  const std::size_t n = 500;
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
    c[i] = std::min(1.0, b[i] + rng.uniform(0, 0.3));
  }
  const auto A = Tensor::from({n}, a), B = Tensor::from({n}, b), C = Tensor::from({n}, c);
  const auto ab = occupancy::csg_union(A, B), ba = occupancy::csg_union(B, A), ac = occupancy::csg_union(A, C);
  const auto with_one = occupancy::csg_intersect(A, Tensor::full({n}, 1.0));
  const auto with_zero = occupancy::csg_union(A, Tensor::zeros({n}));
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(ab[i] == ba[i]);
    CHECK(ac[i] >= ab[i]);
    CHECK(std::abs(with_one[i] - a[i]) <= 1e-15);
    CHECK(with_zero[i] == a[i]);
    for (const auto& r : {ab, occupancy::csg_intersect(A, B), occupancy::csg_diff(A, B)}) {
      CHECK(r[i] >= 0.0);
      CHECK(r[i] <= 1.0);
    }
  }
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS_AS(occupancy::csg_union(Tensor::zeros({2}), Tensor::zeros({3})), ad::ShapeError);
  CHECK_THROWS_AS(occupancy::csg_intersect(Tensor::zeros({2}), Tensor::zeros({2, 1})), ad::ShapeError);
  CHECK_THROWS_AS(occupancy::csg_diff(Tensor::zeros({1}), Tensor::zeros({4})), ad::ShapeError);
}

TEST_CASE("small alpha occupancy matches the solid of the primitive") {
  const sdf::Primitive circle{sdf::PrimitiveKind::Circle, {0.3}, {0.05, -0.1}, {0}};
  std::vector<double> d;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      d.push_back(sdf::signed_distance(circle, std::vector<double>{-0.5 + (j + 0.5) / 64, -0.5 + (i + 0.5) / 64}));
  const auto o = occupancy::to_occupancy(Tensor::from({d.size()}, d), Tensor::scalar(1e-9)).values;
  for (std::size_t i = 0; i < d.size(); ++i) CHECK((o[i] == 1.0) == (d[i] <= 0));
}

TEST_CASE("occupancy gradients pass finite differences") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto D = testing::random_leaf(rng, {20}, -0.5, 1.5);
    auto alpha = Tensor::scalar(rng.uniform(0.2, 1.0), true);
    auto B = testing::random_leaf(rng, {20}, 0, 1);
    const auto r = testing::check_gradients(
        [&] {
          const auto o = occupancy::to_occupancy(D, alpha).values;
          return ad::concat({occupancy::csg_union(o, B), occupancy::csg_intersect(o, B), occupancy::csg_diff(o, B),
                             occupancy::csg_diff(B, o)},
                            0);
        },
        {{"D", D}, {"alpha", alpha}, {"B", B}}, 100, rng);
    INFO(r.worst);
    CHECK(r.max_rel_error <= 1e-5);
  }
}
