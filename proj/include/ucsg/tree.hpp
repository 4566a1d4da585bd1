// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Hard CSG trees: extraction from a model, exact evaluation and JSON
// serialization.

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucsg/grid.hpp"
#include "ucsg/network.hpp"
#include "ucsg/sdf.hpp"

namespace ucsg::tree {

enum class Op { Union, Intersection, Difference };

std::string op_name(Op op);

struct Node {
  bool leaf = true;
  Op op = Op::Union;
  sdf::Primitive primitive;
  std::shared_ptr<Node> left;
  std::shared_ptr<Node> right;
  /// 0-based CSG layer that produced an internal node; -1 when unknown.
  int layer = -1;

  static std::shared_ptr<Node> make_leaf(sdf::Primitive p);
  static std::shared_ptr<Node> make_op(Op op, std::shared_ptr<Node> l, std::shared_ptr<Node> r, int layer = -1);
};

/// Structural equality; parameters compare bitwise.
bool equal(const Node& a, const Node& b);

struct CsgTree {
  std::shared_ptr<Node> root;

  int dim() const;
  std::size_t leaf_count() const;
  std::size_t node_count() const;
  std::size_t depth() const;
  /// Internal nodes per layer tag, indexed by layer.
  std::vector<std::size_t> nodes_per_layer(std::size_t layers) const;
  bool operator==(const CsgTree& other) const;
};

/// Hard tree for sample `sample` of a batch: argmax operand selections per
/// layer, keeping only channels that feed the root.
CsgTree extract_tree(const net::Model& model, const ad::Tensor& input, std::size_t sample = 0);

/// Builds the tree from precomputed selections and primitives.
CsgTree build_tree(const net::ModelConfig& config, const std::vector<net::LayerSelection>& selections,
                   const sdf::PrimitiveSet& primitives, std::size_t sample);

/// Membership of each point (dim coordinates per point): leaves are D <= 0,
/// operators are exact Boolean operations.
std::vector<std::uint8_t> evaluate_tree(const CsgTree& tree, const std::vector<double>& points);

/// Membership at the cell centers of a dim-dimensional grid.
Grid rasterize(const CsgTree& tree, std::size_t resolution);

/// Malformed tree document; `path` is a JSON pointer to the offending value.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& message)
      : std::runtime_error("tree document at '" + path + "': " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

nlohmann::json to_json(const CsgTree& tree);
CsgTree from_json(const nlohmann::json& doc);
std::string serialize_tree(const CsgTree& tree);
/// Parses text; syntax errors are reported as ParseError with path "".
CsgTree deserialize_tree(const std::string& text);

}  // namespace ucsg::tree
