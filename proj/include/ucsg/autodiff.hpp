// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Minimal define-by-run reverse-mode automatic differentiation over dense
// row-major tensors of doubles.
//
// A Tape records every operation whose inputs require gradients while it is
// the active tape of the calling thread. Leaves (parameters) are created with
// requires_grad = true and accumulate gradients across backward passes until
// zero_grad() is called on them.
//
//   ad::Tape tape;
//   auto y = ad::sum(ad::square(x));
//   tape.backward(y);          // x.grad() now holds 2x

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucsg::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Raised for shape mismatches and other misuse of the operation catalog.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on invalid backward requests (non-scalar root, detached root,
/// repeated backward without reset).
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Tape;
struct Node;

using BackwardFn = std::function<void(Node&)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
  const Tape* tape = nullptr;
  const char* op = "leaf";

  /// Returns the gradient buffer, allocating it zeroed on first use.
  std::span<double> grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim() const { return node_->shape.size(); }
  std::size_t size(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  /// Mutable access to values. Only meaningful for leaves; mutating a value
  /// that a live tape depends on invalidates that tape.
  std::span<double> mutable_data() { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  /// Gradient buffer; empty span when no gradient has been accumulated.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad();

  /// Copy of the values with no history.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared_node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Records operations for one forward pass. Constructing a Tape makes it the
/// active tape for the current thread until it is destroyed; tapes nest.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Runs reverse-mode accumulation from a scalar (shape []) root recorded on
  /// this tape. A second call requires reset() first.
  void backward(const Tensor& root);

  /// Zeroes every gradient touched by this tape (recorded nodes and the
  /// leaves they read) and re-arms backward().
  void reset();

  std::size_t size() const { return nodes_.size(); }
  static Tape* current();

  void record(const std::shared_ptr<Node>& node);

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
  Tape* previous_ = nullptr;
  bool consumed_ = false;
};

/// Builds a node from precomputed forward values. The node joins the active
/// tape (and keeps `backward`) only if some input requires gradients and a
/// tape is active; otherwise the result is a constant.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward);

/// Gradient buffer of input `i` of `self`, or an empty span if that input does
/// not require gradients.
std::span<double> input_grad(Node& self, std::size_t i);

/// Fingerprint of the piecewise branches taken by non-smooth ops while a
/// monitor is alive on the current thread. Two evaluations with equal
/// signatures took identical branches at every element.
class BranchMonitor {
 public:
  BranchMonitor();
  ~BranchMonitor();
  BranchMonitor(const BranchMonitor&) = delete;
  BranchMonitor& operator=(const BranchMonitor&) = delete;

  std::uint64_t signature() const { return hash_; }
  void note(std::uint64_t code);
  static BranchMonitor* current();

 private:
  std::uint64_t hash_ = 1469598103934665603ull;
  BranchMonitor* previous_ = nullptr;
};

inline void note_branch(std::uint64_t code) {
  if (auto* m = BranchMonitor::current()) m->note(code);
}

// ---------------------------------------------------------------------------
// Operation catalog
// ---------------------------------------------------------------------------

// Elementwise binary ops with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

// Elementwise unary ops.
Tensor neg(const Tensor& x);
Tensor affine(const Tensor& x, double scale, double shift);  // scale*x + shift
Tensor square(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
/// Clips to [lo, hi]. The gradient passes through on the closed interval.
Tensor clamp(const Tensor& x, double lo, double hi);
/// max(x, c); gradient flows only where x > c.
Tensor max_with_const(const Tensor& x, double c);

// Reductions.
Tensor sum(const Tensor& x);                   // -> shape []
Tensor sum(const Tensor& x, std::size_t axis);  // removes `axis`
Tensor mean(const Tensor& x);                  // -> shape []
Tensor l2_norm_rows(const Tensor& x);          // norm over the last axis

// Softmax family along the last axis.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n]
Tensor transpose(const Tensor& x);                // 2-D only
/// x [B, in], weight [out, in], bias [out] (optional) -> [B, out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Batched contraction over the last axis:
/// values [B, P, M], weights [B, S, M] -> [B, P, S].
Tensor weighted_sum(const Tensor& values, const Tensor& weights);

struct ConvParams {
  std::size_t stride = 1;
  std::size_t padding = 0;
};
/// x [N, C, H, W], weight [O, C, K, K], bias [O] (optional) -> [N, O, H', W'].
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvParams params);
/// x [N, C, D, H, W], weight [O, C, K, K, K], bias [O] (optional).
Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvParams params);

// Shape manipulation.
Tensor reshape(const Tensor& x, Shape shape);
Tensor concat(const std::vector<Tensor>& xs, std::size_t axis);
Tensor stack(const std::vector<Tensor>& xs, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor broadcast_to(const Tensor& x, const Shape& shape);

/// Output shape of broadcasting `a` against `b`; throws ShapeError naming `op`.
Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator+(const Tensor& x, double c) { return affine(x, 1.0, c); }
inline Tensor operator+(double c, const Tensor& x) { return affine(x, 1.0, c); }
inline Tensor operator-(const Tensor& x, double c) { return affine(x, 1.0, -c); }
inline Tensor operator-(double c, const Tensor& x) { return affine(x, -1.0, c); }
inline Tensor operator*(const Tensor& x, double c) { return affine(x, c, 0.0); }
inline Tensor operator*(double c, const Tensor& x) { return affine(x, c, 0.0); }

}  // namespace ucsg::ad
