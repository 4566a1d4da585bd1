// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ucsg::ad {

namespace {

thread_local Tape* g_tape = nullptr;
thread_local BranchMonitor* g_monitor = nullptr;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

[[noreturn]] void shape_fail(const char* op, const std::string& what) {
  throw ShapeError(std::string(op) + ": " + what);
}

// Maps each flat output index to the flat index of an input broadcast into
// `out`. Empty result means the identity mapping.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  if (in == out) return {};
  const std::size_t n = numel(out);
  std::vector<std::size_t> idx(n, 0);
  if (numel(in) == 1) return idx;
  const std::size_t rank = out.size();
  const std::size_t offset = rank - in.size();
  std::vector<std::size_t> in_stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t d = in.size(); d-- > 0;) {
    in_stride[d + offset] = in[d] == 1 ? 0 : s;
    s *= in[d];
  }
  std::vector<std::size_t> counter(rank, 0);
  std::size_t cur = 0;
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = cur;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      cur += in_stride[d];
      if (counter[d] < out[d]) break;
      cur -= in_stride[d] * counter[d];
      counter[d] = 0;
    }
  }
  return idx;
}

template <typename Fwd, typename Da, typename Db>
Tensor binary_op(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, Da da, Db db) {
  Shape out_shape = broadcast_shapes(a.shape(), b.shape(), op);
  const std::size_t n = numel(out_shape);
  auto ia = std::make_shared<std::vector<std::size_t>>(broadcast_index(a.shape(), out_shape));
  auto ib = std::make_shared<std::vector<std::size_t>>(broadcast_index(b.shape(), out_shape));
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(n);
  if (ia->empty() && ib->empty()) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ja = ia->empty() ? i : (*ia)[i];
      const std::size_t jb = ib->empty() ? i : (*ib)[i];
      out[i] = fwd(av[ja], bv[jb]);
    }
  }
  return make_result(op, std::move(out_shape), std::move(out), {a, b},
                     [ia, ib, da, db](Node& self) {
                       const auto& x = self.inputs[0]->value;
                       const auto& y = self.inputs[1]->value;
                       auto ga = input_grad(self, 0);
                       auto gb = input_grad(self, 1);
                       const std::size_t m = self.value.size();
                       for (std::size_t i = 0; i < m; ++i) {
                         const std::size_t ja = ia->empty() ? i : (*ia)[i];
                         const std::size_t jb = ib->empty() ? i : (*ib)[i];
                         const double g = self.grad[i];
                         if (!ga.empty()) ga[ja] += g * da(x[ja], y[jb]);
                         if (!gb.empty()) gb[jb] += g * db(x[ja], y[jb]);
                       }
                     });
}

// `deriv(x, y)` receives the input and the forward output.
template <typename Fwd, typename Deriv>
Tensor unary_op(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [deriv](Node& self) {
    auto gx = input_grad(self, 0);
    if (gx.empty()) return;
    const auto& xin = self.inputs[0]->value;
    for (std::size_t i = 0; i < gx.size(); ++i)
      gx[i] += self.grad[i] * deriv(xin[i], self.value[i]);
  });
}

std::size_t product(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= s[i];
  return p;
}

}  // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

std::span<double> Node::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(ad::numel(shape), value);
  return from(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (ad::numel(shape) != values.size())
    throw ShapeError("tensor: shape " + to_string(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

// ---------------------------------------------------------------------------
// Tape

Tape::Tape() : previous_(g_tape) { g_tape = this; }

Tape::~Tape() { g_tape = previous_; }

Tape* Tape::current() { return g_tape; }

void Tape::record(const std::shared_ptr<Node>& node) {
  node->tape = this;
  nodes_.push_back(node);
}

void Tape::backward(const Tensor& root) {
  if (!root.defined() || !root.shape().empty())
    throw TapeError("backward: root must be a scalar of shape [], got " +
                    (root.defined() ? to_string(root.shape()) : std::string("undefined")));
  const bool owned = root.node()->tape == this &&
                     std::any_of(nodes_.rbegin(), nodes_.rend(), [&](const auto& n) { return n.get() == root.node(); });
  if (!owned)
    throw TapeError("backward: root is not recorded on this tape (detached)");
  if (consumed_) throw TapeError("backward: already run on this tape; call reset() first");
  consumed_ = true;
  root.node()->grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n);
  }
}

void Tape::reset() {
  for (auto& n : nodes_) {
    std::fill(n->grad.begin(), n->grad.end(), 0.0);
    for (auto& in : n->inputs)
      if (in) std::fill(in->grad.begin(), in->grad.end(), 0.0);
  }
  consumed_ = false;
}

Tensor make_result(const char* op, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  Tape* tape = g_tape;
  const bool needs = tape != nullptr && std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
                       return t.defined() && t.requires_grad();
                     });
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.defined() ? t.shared_node() : nullptr);
    node->backward = std::move(backward);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

std::span<double> input_grad(Node& self, std::size_t i) {
  Node* in = self.inputs[i].get();
  if (in == nullptr || !in->requires_grad) return {};
  return in->grad_buffer();
}

// ---------------------------------------------------------------------------
// BranchMonitor

BranchMonitor::BranchMonitor() : previous_(g_monitor) { g_monitor = this; }
BranchMonitor::~BranchMonitor() { g_monitor = previous_; }
BranchMonitor* BranchMonitor::current() { return g_monitor; }

void BranchMonitor::note(std::uint64_t code) {
  hash_ ^= code + 0x9e3779b97f4a7c15ull;
  hash_ *= 1099511628211ull;
}

// ---------------------------------------------------------------------------
// Elementwise

Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) shape_fail(op, a, b);
    out[i] = da == 1 ? db : da;
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      "div", a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor neg(const Tensor& x) {
  return unary_op("neg", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor affine(const Tensor& x, double scale, double shift) {
  return unary_op(
      "affine", x, [=](double v) { return scale * v + shift; }, [=](double, double) { return scale; });
}

Tensor square(const Tensor& x) {
  return unary_op("square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor abs(const Tensor& x) {
  return unary_op(
      "abs", x,
      [](double v) {
        note_branch(v > 0.0 ? 1 : (v < 0.0 ? 2 : 3));
        return std::abs(v);
      },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor sqrt(const Tensor& x) {
  return unary_op(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor exp(const Tensor& x) {
  return unary_op("exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary_op("log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sin(const Tensor& x) {
  return unary_op("sin", x, [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary_op("cos", x, [](double v) { return std::cos(v); }, [](double v, double) { return -std::sin(v); });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      "sigmoid", x,
      [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary_op("tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary_op(
      "leaky_relu", x,
      [slope](double v) {
        note_branch(v > 0.0 ? 11 : 12);
        return v > 0.0 ? v : slope * v;
      },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) shape_fail("clamp", "lower bound exceeds upper bound");
  return unary_op(
      "clamp", x,
      [lo, hi](double v) {
        note_branch(v < lo ? 21 : (v > hi ? 22 : (v == lo || v == hi ? 23 : 24)));
        return std::clamp(v, lo, hi);
      },
      [lo, hi](double v, double) { return v >= lo && v <= hi ? 1.0 : 0.0; });
}

Tensor max_with_const(const Tensor& x, double c) {
  return unary_op(
      "max_with_const", x,
      [c](double v) {
        note_branch(v > c ? 31 : (v < c ? 32 : 33));
        return v > c ? v : c;
      },
      [c](double v, double) { return v > c ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Reductions

Tensor sum(const Tensor& x) {
  const auto v = x.data();
  double s = 0.0;
  for (double e : v) s += e;
  return make_result("sum", {}, {s}, {x}, [](Node& self) {
    auto gx = input_grad(self, 0);
    const double g = self.grad[0];
    for (double& e : gx) e += g;
  });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const Shape& in = x.shape();
  if (axis >= in.size()) shape_fail("sum", "axis " + std::to_string(axis) + " out of range for " + to_string(in));
  const std::size_t outer = product(in, 0, axis);
  const std::size_t len = in[axis];
  const std::size_t inner = product(in, axis + 1, in.size());
  Shape out_shape = in;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(outer * inner, 0.0);
  const auto v = x.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < len; ++k)
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += v[(o * len + k) * inner + i];
  return make_result("sum_axis", std::move(out_shape), std::move(out), {x},
                     [outer, len, inner](Node& self) {
                       auto gx = input_grad(self, 0);
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t k = 0; k < len; ++k)
                           for (std::size_t i = 0; i < inner; ++i)
                             gx[(o * len + k) * inner + i] += self.grad[o * inner + i];
                     });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  if (x.numel() == 0) shape_fail("mean", "empty tensor");
  const auto v = x.data();
  double s = 0.0;
  for (double e : v) s += e;
  return make_result("mean", {}, {s / n}, {x}, [n](Node& self) {
    auto gx = input_grad(self, 0);
    const double g = self.grad[0] / n;
    for (double& e : gx) e += g;
  });
}

Tensor l2_norm_rows(const Tensor& x) {
  const Shape& in = x.shape();
  if (in.empty()) shape_fail("l2_norm_rows", "needs at least one axis");
  const std::size_t cols = in.back();
  const std::size_t rows = cols == 0 ? 0 : x.numel() / cols;
  Shape out_shape(in.begin(), in.end() - 1);
  std::vector<double> out(rows);
  const auto v = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += v[r * cols + c] * v[r * cols + c];
    out[r] = std::sqrt(s);
  }
  return make_result("l2_norm_rows", std::move(out_shape), std::move(out), {x}, [rows, cols](Node& self) {
    auto gx = input_grad(self, 0);
    const auto& xv = self.inputs[0]->value;
    for (std::size_t r = 0; r < rows; ++r) {
      const double n = self.value[r];
      if (n == 0.0) continue;  // subgradient 0 at the origin
      const double g = self.grad[r] / n;
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g * xv[r * cols + c];
    }
  });
}

// ---------------------------------------------------------------------------
// Softmax

Tensor softmax(const Tensor& x) {
  const Shape& in = x.shape();
  if (in.empty()) shape_fail("softmax", "needs at least one axis");
  const std::size_t cols = in.back();
  const std::size_t rows = cols == 0 ? 0 : x.numel() / cols;
  std::vector<double> out(x.numel());
  const auto v = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = v.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (out[r * cols + c] = std::exp(row[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= s;
  }
  return make_result("softmax", in, std::move(out), {x}, [rows, cols](Node& self) {
    auto gx = input_grad(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* g = self.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += y[c] * (g[c] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  const Shape& in = x.shape();
  if (in.empty()) shape_fail("log_softmax", "needs at least one axis");
  const std::size_t cols = in.back();
  const std::size_t rows = cols == 0 ? 0 : x.numel() / cols;
  std::vector<double> out(x.numel());
  const auto v = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = v.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += std::exp(row[c] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = row[c] - lse;
  }
  return make_result("log_softmax", in, std::move(out), {x}, [rows, cols](Node& self) {
    auto gx = input_grad(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* g = self.grad.data() + r * cols;
      double gs = 0.0;
      for (std::size_t c = 0; c < cols; ++c) gs += g[c];
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[c] - std::exp(y[c]) * gs;
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.dim() != 2 || b.dim() != 2 || a.size(1) != b.size(0)) shape_fail("matmul", a.shape(), b.shape());
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  std::vector<double> out(m * n);
  MapMat(out.data(), m, n).noalias() = ConstMapMat(a.data().data(), m, k) * ConstMapMat(b.data().data(), k, n);
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    ConstMapMat g(self.grad.data(), m, n);
    if (auto ga = input_grad(self, 0); !ga.empty())
      MapMat(ga.data(), m, k).noalias() += g * ConstMapMat(self.inputs[1]->value.data(), k, n).transpose();
    if (auto gb = input_grad(self, 1); !gb.empty())
      MapMat(gb.data(), k, n).noalias() += ConstMapMat(self.inputs[0]->value.data(), m, k).transpose() * g;
  });
}

Tensor transpose(const Tensor& x) {
  if (x.dim() != 2) shape_fail("transpose", "expects a 2-D tensor, got " + to_string(x.shape()));
  const std::size_t r = x.size(0), c = x.size(1);
  std::vector<double> out(r * c);
  MapMat(out.data(), c, r) = ConstMapMat(x.data().data(), r, c).transpose();
  return make_result("transpose", {c, r}, std::move(out), {x}, [r, c](Node& self) {
    auto gx = input_grad(self, 0);
    MapMat(gx.data(), r, c) += ConstMapMat(self.grad.data(), c, r).transpose();
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.dim() != 2 || weight.dim() != 2 || x.size(1) != weight.size(1))
    shape_fail("linear", x.shape(), weight.shape());
  const std::size_t batch = x.size(0), in = x.size(1), out_f = weight.size(0);
  if (bias.defined() && (bias.dim() != 1 || bias.size(0) != out_f)) shape_fail("linear", weight.shape(), bias.shape());
  std::vector<double> out(batch * out_f);
  MapMat y(out.data(), batch, out_f);
  y.noalias() = ConstMapMat(x.data().data(), batch, in) * ConstMapMat(weight.data().data(), out_f, in).transpose();
  if (bias.defined()) y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), out_f);
  return make_result("linear", {batch, out_f}, std::move(out), {x, weight, bias},
                     [batch, in, out_f](Node& self) {
                       ConstMapMat g(self.grad.data(), batch, out_f);
                       if (auto gx = input_grad(self, 0); !gx.empty())
                         MapMat(gx.data(), batch, in).noalias() +=
                             g * ConstMapMat(self.inputs[1]->value.data(), out_f, in);
                       if (auto gw = input_grad(self, 1); !gw.empty())
                         MapMat(gw.data(), out_f, in).noalias() +=
                             g.transpose() * ConstMapMat(self.inputs[0]->value.data(), batch, in);
                       if (self.inputs[2]) {
                         if (auto gb = input_grad(self, 2); !gb.empty())
                           Eigen::Map<Eigen::RowVectorXd>(gb.data(), out_f) += g.colwise().sum();
                       }
                     });
}

Tensor weighted_sum(const Tensor& values, const Tensor& weights) {
  if (values.dim() != 3 || weights.dim() != 3 || values.size(0) != weights.size(0) ||
      values.size(2) != weights.size(2))
    shape_fail("weighted_sum", values.shape(), weights.shape());
  const std::size_t batch = values.size(0), p = values.size(1), m = values.size(2), s = weights.size(1);
  std::vector<double> out(batch * p * s);
  for (std::size_t b = 0; b < batch; ++b) {
    MapMat(out.data() + b * p * s, p, s).noalias() =
        ConstMapMat(values.data().data() + b * p * m, p, m) *
        ConstMapMat(weights.data().data() + b * s * m, s, m).transpose();
  }
  return make_result("weighted_sum", {batch, p, s}, std::move(out), {values, weights},
                     [batch, p, m, s](Node& self) {
                       auto gv = input_grad(self, 0);
                       auto gw = input_grad(self, 1);
                       for (std::size_t b = 0; b < batch; ++b) {
                         ConstMapMat g(self.grad.data() + b * p * s, p, s);
                         if (!gv.empty())
                           MapMat(gv.data() + b * p * m, p, m).noalias() +=
                               g * ConstMapMat(self.inputs[1]->value.data() + b * s * m, s, m);
                         if (!gw.empty())
                           MapMat(gw.data() + b * s * m, s, m).noalias() +=
                               g.transpose() * ConstMapMat(self.inputs[0]->value.data() + b * p * m, p, m);
                       }
                     });
}

// ---------------------------------------------------------------------------
// Shape manipulation

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) shape_fail("reshape", x.shape(), shape);
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    auto gx = input_grad(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) shape_fail("concat", "no inputs");
  const Shape& first = xs.front().shape();
  if (axis >= first.size()) shape_fail("concat", "axis out of range for " + to_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  auto lens = std::make_shared<std::vector<std::size_t>>();
  for (const auto& t : xs) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) shape_fail("concat", first, s);
    out_shape[axis] += s[axis];
    lens->push_back(s[axis]);
  }
  const std::size_t outer = product(first, 0, axis);
  const std::size_t inner = product(first, axis + 1, first.size());
  const std::size_t total = out_shape[axis];
  std::vector<double> out(numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const auto v = xs[t].data();
    const std::size_t len = (*lens)[t];
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(v.data() + o * len * inner, len * inner, out.data() + (o * total + offset) * inner);
    offset += len;
  }
  return make_result("concat", std::move(out_shape), std::move(out), xs, [lens, outer, inner, total](Node& self) {
    std::size_t off = 0;
    for (std::size_t t = 0; t < lens->size(); ++t) {
      const std::size_t len = (*lens)[t];
      if (auto g = input_grad(self, t); !g.empty()) {
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t i = 0; i < len * inner; ++i)
            g[o * len * inner + i] += self.grad[(o * total + off) * inner + i];
      }
      off += len;
    }
  });
}

Tensor stack(const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) shape_fail("stack", "no inputs");
  std::vector<Tensor> expanded;
  expanded.reserve(xs.size());
  for (const auto& t : xs) {
    Shape s = t.shape();
    if (axis > s.size()) shape_fail("stack", "axis out of range for " + to_string(s));
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(axis), 1);
    expanded.push_back(reshape(t, std::move(s)));
  }
  return concat(expanded, axis);
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& in = x.shape();
  if (axis >= in.size() || start + length > in[axis])
    shape_fail("slice", "range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                            ") on axis " + std::to_string(axis) + " of " + to_string(in));
  const std::size_t outer = product(in, 0, axis);
  const std::size_t inner = product(in, axis + 1, in.size());
  const std::size_t full = in[axis];
  Shape out_shape = in;
  out_shape[axis] = length;
  std::vector<double> out(outer * length * inner);
  const auto v = x.data();
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(v.data() + (o * full + start) * inner, length * inner, out.data() + o * length * inner);
  return make_result("slice", std::move(out_shape), std::move(out), {x},
                     [outer, inner, full, start, length](Node& self) {
                       auto gx = input_grad(self, 0);
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t i = 0; i < length * inner; ++i)
                           gx[(o * full + start) * inner + i] += self.grad[o * length * inner + i];
                     });
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  if (broadcast_shapes(x.shape(), shape, "broadcast") != shape) shape_fail("broadcast", x.shape(), shape);
  auto idx = std::make_shared<std::vector<std::size_t>>(broadcast_index(x.shape(), shape));
  const std::size_t n = numel(shape);
  std::vector<double> out(n);
  const auto v = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = v[idx->empty() ? i : (*idx)[i]];
  return make_result("broadcast", shape, std::move(out), {x}, [idx](Node& self) {
    auto gx = input_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[idx->empty() ? i : (*idx)[i]] += self.grad[i];
  });
}

}  // namespace ucsg::ad
