// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>

namespace ucsg::tree {

std::string op_name(Op op) {
  switch (op) {
    case Op::Union: return "union";
    case Op::Intersection: return "intersection";
    case Op::Difference: return "difference";
  }
  return "union";
}

std::shared_ptr<Node> Node::make_leaf(sdf::Primitive p) {
  auto n = std::make_shared<Node>();
  n->primitive = std::move(p);
  return n;
}

std::shared_ptr<Node> Node::make_op(Op op, std::shared_ptr<Node> l, std::shared_ptr<Node> r, int layer) {
  auto n = std::make_shared<Node>();
  n->leaf = false;
  n->op = op;
  n->left = std::move(l);
  n->right = std::move(r);
  n->layer = layer;
  return n;
}

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

std::size_t count_nodes(const Node* n, bool leaves_only) {
  if (!n) return 0;
  if (n->leaf) return 1;
  return (leaves_only ? 0 : 1) + count_nodes(n->left.get(), leaves_only) + count_nodes(n->right.get(), leaves_only);
}

}  // namespace

bool equal(const Node& a, const Node& b) {
  if (a.leaf != b.leaf) return false;
  if (a.leaf)
    return a.primitive.kind == b.primitive.kind && bitwise_equal(a.primitive.params, b.primitive.params) &&
           bitwise_equal(a.primitive.translation, b.primitive.translation) &&
           bitwise_equal(a.primitive.rotation, b.primitive.rotation);
  return a.op == b.op && a.layer == b.layer && equal(*a.left, *b.left) && equal(*a.right, *b.right);
}

int CsgTree::dim() const {
  const Node* n = root.get();
  while (n && !n->leaf) n = n->left.get();
  if (!n) throw std::invalid_argument("CsgTree: empty tree");
  return sdf::spatial_dim(n->primitive.kind);
}

std::size_t CsgTree::leaf_count() const { return count_nodes(root.get(), true); }
std::size_t CsgTree::node_count() const { return count_nodes(root.get(), false); }

std::size_t CsgTree::depth() const {
  std::function<std::size_t(const Node*)> rec = [&](const Node* n) -> std::size_t {
    if (!n || n->leaf) return 0;
    return 1 + std::max(rec(n->left.get()), rec(n->right.get()));
  };
  return rec(root.get());
}

std::vector<std::size_t> CsgTree::nodes_per_layer(std::size_t layers) const {
  std::vector<std::size_t> counts(layers, 0);
  std::function<void(const Node*)> rec = [&](const Node* n) {
    if (!n || n->leaf) return;
    if (n->layer >= 0 && static_cast<std::size_t>(n->layer) < layers) ++counts[static_cast<std::size_t>(n->layer)];
    rec(n->left.get());
    rec(n->right.get());
  };
  rec(root.get());
  return counts;
}

bool CsgTree::operator==(const CsgTree& other) const {
  if (!root || !other.root) return !root && !other.root;
  return equal(*root, *other.root);
}

// ---------------------------------------------------------------------------

CsgTree build_tree(const net::ModelConfig& config, const std::vector<net::LayerSelection>& selections,
                   const sdf::PrimitiveSet& primitives, std::size_t sample) {
  const std::size_t layers = config.csg.layer_count();
  if (selections.size() != layers)
    throw std::invalid_argument("build_tree: expected " + std::to_string(layers) + " layer selections, got " +
                                std::to_string(selections.size()));
  std::function<std::shared_ptr<Node>(std::size_t, std::size_t)> channel;
  auto input = [&](std::size_t layer, std::size_t i) -> std::shared_ptr<Node> {
    if (layer > 0) {
      const std::size_t prev = config.layer_emitted(layer - 1);
      if (i < prev) return channel(layer - 1, i);
      i -= prev;
    }
    return Node::make_leaf(primitives.primitive(sample, i));
  };
  channel = [&](std::size_t layer, std::size_t c) -> std::shared_ptr<Node> {
    const auto& sel = selections[layer];
    const std::size_t nodes = config.layer_nodes(layer);
    const bool last = layer + 1 == layers;
    const std::size_t node = last ? 0 : c / 4;
    const std::size_t li = sel.left_index.at(sample * nodes + node), ri = sel.right_index.at(sample * nodes + node);
    const int tag = static_cast<int>(layer);
    switch (last ? 0 : c % 4) {
      case 0: return Node::make_op(Op::Union, input(layer, li), input(layer, ri), tag);
      case 1: return Node::make_op(Op::Intersection, input(layer, li), input(layer, ri), tag);
      case 2: return Node::make_op(Op::Difference, input(layer, li), input(layer, ri), tag);
      default: return Node::make_op(Op::Difference, input(layer, ri), input(layer, li), tag);
    }
  };
  return CsgTree{channel(layers - 1, 0)};
}

CsgTree extract_tree(const net::Model& model, const ad::Tensor& input, std::size_t sample) {
  Rng unused(0);
  const auto dim = static_cast<std::size_t>(model.config().dim());
  const auto r = model.forward(input, ad::Tensor::zeros({1, dim}), net::Mode::Eval, unused);
  return build_tree(model.config(), r.selections, r.primitives, sample);
}

// ---------------------------------------------------------------------------

namespace {

bool member(const Node& n, std::span<const double> p) {
  if (n.leaf) return sdf::signed_distance(n.primitive, p) <= 0.0;
  const bool a = member(*n.left, p);
  const bool b = member(*n.right, p);
  switch (n.op) {
    case Op::Union: return a || b;
    case Op::Intersection: return a && b;
    case Op::Difference: return a && !b;
  }
  return false;
}

}  // namespace

std::vector<std::uint8_t> evaluate_tree(const CsgTree& tree, const std::vector<double>& points) {
  const auto d = static_cast<std::size_t>(tree.dim());
  if (points.size() % d != 0) throw std::invalid_argument("evaluate_tree: point buffer is not a multiple of dim");
  std::vector<std::uint8_t> out(points.size() / d);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = member(*tree.root, std::span<const double>(points.data() + i * d, d)) ? 1 : 0;
  return out;
}

Grid rasterize(const CsgTree& tree, std::size_t resolution) {
  Grid g(tree.dim(), resolution);
  g.cells = evaluate_tree(tree, g.centers());
  return g;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json node_json(const Node& n) {
  if (n.leaf)
    return {{"primitive", std::string(sdf::kind_name(n.primitive.kind))},
            {"params", n.primitive.params},
            {"translation", n.primitive.translation},
            {"rotation", n.primitive.rotation}};
  nlohmann::json j = {{"op", op_name(n.op)}, {"left", node_json(*n.left)}, {"right", node_json(*n.right)}};
  if (n.layer >= 0) j["layer"] = n.layer;
  return j;
}

std::string escape_key(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::vector<double> number_array(const nlohmann::json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array()) throw ParseError(path, "expected an array of numbers");
  if (j.size() != expected)
    throw ParseError(path, "expected " + std::to_string(expected) + " values, got " + std::to_string(j.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& v = j[i];
    if (!v.is_number()) throw ParseError(path + "/" + std::to_string(i), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(path + "/" + std::to_string(i), "value is not finite");
    out.push_back(d);
  }
  return out;
}

std::shared_ptr<Node> parse_node(const nlohmann::json& j, const std::string& path, int& dim, std::size_t depth) {
  if (depth > 256) throw ParseError(path, "tree is nested too deeply");
  if (!j.is_object()) throw ParseError(path, "expected an object");
  const bool is_op = j.contains("op"), is_leaf = j.contains("primitive");
  if (is_op == is_leaf) throw ParseError(path, "node must have exactly one of \"op\" or \"primitive\"");
  if (is_leaf) {
    for (const auto& [key, value] : j.items())
      if (key != "primitive" && key != "params" && key != "translation" && key != "rotation")
        throw ParseError(path + "/" + escape_key(key), "unknown leaf field");
    const auto& kj = j["primitive"];
    if (!kj.is_string()) throw ParseError(path + "/primitive", "expected a primitive name");
    const auto kind = sdf::kind_from_name(kj.get<std::string>());
    if (!kind) throw ParseError(path + "/primitive", "unknown primitive \"" + kj.get<std::string>() + "\"");
    const int d = sdf::spatial_dim(*kind);
    if (dim == 0) dim = d;
    if (d != dim) throw ParseError(path + "/primitive", "mixes 2-D and 3-D primitives");
    for (const char* key : {"params", "translation", "rotation"})
      if (!j.contains(key)) throw ParseError(path, std::string("missing field \"") + key + "\"");
    sdf::Primitive p;
    p.kind = *kind;
    p.params = number_array(j["params"], path + "/params", sdf::param_count(*kind));
    p.translation = number_array(j["translation"], path + "/translation", static_cast<std::size_t>(d));
    p.rotation = number_array(j["rotation"], path + "/rotation", sdf::rotation_slots(d));
    return Node::make_leaf(std::move(p));
  }
  for (const auto& [key, value] : j.items())
    if (key != "op" && key != "left" && key != "right" && key != "layer")
      throw ParseError(path + "/" + escape_key(key), "unknown operator field");
  const auto& oj = j["op"];
  if (!oj.is_string()) throw ParseError(path + "/op", "expected an operator name");
  const std::string name = oj.get<std::string>();
  Op op;
  if (name == "union") op = Op::Union;
  else if (name == "intersection") op = Op::Intersection;
  else if (name == "difference") op = Op::Difference;
  else throw ParseError(path + "/op", "unknown operator \"" + name + "\"");
  int layer = -1;
  if (j.contains("layer")) {
    const auto& lj = j["layer"];
    if (!lj.is_number_integer() || lj.get<long long>() < 0 || lj.get<long long>() > 1 << 20)
      throw ParseError(path + "/layer", "expected a non-negative integer");
    layer = static_cast<int>(lj.get<long long>());
  }
  for (const char* key : {"left", "right"})
    if (!j.contains(key)) throw ParseError(path, std::string("missing field \"") + key + "\"");
  auto l = parse_node(j["left"], path + "/left", dim, depth + 1);
  auto r = parse_node(j["right"], path + "/right", dim, depth + 1);
  return Node::make_op(op, std::move(l), std::move(r), layer);
}

}  // namespace

nlohmann::json to_json(const CsgTree& tree) {
  if (!tree.root) throw std::invalid_argument("to_json: empty tree");
  return node_json(*tree.root);
}

CsgTree from_json(const nlohmann::json& doc) {
  int dim = 0;
  return CsgTree{parse_node(doc, "", dim, 0)};
}

std::string serialize_tree(const CsgTree& tree) { return to_json(tree).dump(2) + "\n"; }

CsgTree deserialize_tree(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

}  // namespace ucsg::tree
