// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ucsg/metrics.hpp"
#include "ucsg/rng.hpp"
#include "ucsg/training.hpp"

namespace ucsg::eval {

namespace {

struct Batched {
  std::vector<Grid> grids;
  std::vector<tree::CsgTree> trees;
};

Batched run(const net::Model& model, const std::vector<Grid>& inputs, std::size_t resolution, double threshold,
            std::size_t batch, bool want_trees) {
  const int dim = model.config().dim();
  if (batch == 0) throw std::invalid_argument("predict: batch size must be positive");
  for (const auto& g : inputs)
    if (g.dim != dim || g.resolution != model.config().encoder.resolution)
      throw std::invalid_argument("predict: input grid does not match the model input");
  const Grid layout(dim, resolution);
  const auto centers = layout.centers();
  const auto points = ad::Tensor::from({layout.size(), static_cast<std::size_t>(dim)}, centers);

  Batched out;
  Rng unused(0);
  for (std::size_t start = 0; start < inputs.size(); start += batch) {
    std::vector<std::size_t> idx(std::min(batch, inputs.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto r = model.forward(train::batch_input(inputs, idx), points, net::Mode::Eval, unused);
    const auto occ = r.occupancy.data();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      Grid g(dim, resolution);
      for (std::size_t p = 0; p < g.size(); ++p) g.cells[p] = occ[b * g.size() + p] >= threshold ? 1 : 0;
      out.grids.push_back(std::move(g));
      if (want_trees) out.trees.push_back(tree::build_tree(model.config(), r.selections, r.primitives, b));
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> surface_chamfer(const Grid& a, const Grid& b, const Options& o) {
  Rng ra(o.seed), rb(o.seed);
  const auto pa = metrics::sample_surface(a, o.surface_points, ra);
  const auto pb = metrics::sample_surface(b, o.surface_points, rb);
  if (pa.size() == 0 || pb.size() == 0) return std::nullopt;
  return metrics::chamfer_distance(pa, pb);
}

}  // namespace

std::vector<Grid> predict(const net::Model& model, const std::vector<Grid>& inputs, std::size_t resolution,
                          double threshold, std::size_t batch) {
  return run(model, inputs, resolution, threshold, batch, false).grids;
}

nlohmann::json SampleMetrics::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"accuracy", accuracy},
                      {"iou", iou},
                      {"soft_hard_iou", soft_hard_iou},
                      {"tree_nodes", tree_nodes}};
  j["chamfer"] = chamfer ? nlohmann::json(*chamfer) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json Report::to_json() const {
  nlohmann::json samples_json = nlohmann::json::array();
  for (const auto& s : samples) samples_json.push_back(s.to_json());
  nlohmann::json j = {{"count", samples.size()},
                      {"mean_accuracy", mean_accuracy},
                      {"mean_iou", mean_iou},
                      {"mean_soft_hard_iou", mean_soft_hard_iou},
                      {"min_soft_hard_iou", min_soft_hard_iou},
                      {"samples", samples_json}};
  j["mean_chamfer"] = mean_chamfer ? nlohmann::json(*mean_chamfer) : nlohmann::json(nullptr);
  return j;
}

Report evaluate_model(const net::Model& model, const std::vector<Grid>& targets, const std::vector<std::string>& names,
                      const Options& options) {
  if (names.size() != targets.size()) throw std::invalid_argument("evaluate_model: one name per target required");
  for (const auto& t : targets)
    if (t.resolution != options.resolution)
      throw std::invalid_argument("evaluate_model: target resolution differs from the evaluation grid");
  const auto batched = run(model, targets, options.resolution, options.threshold, 16, true);

  Report report;
  std::vector<double> acc, iou, shi, cd;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    SampleMetrics s;
    s.name = names[i];
    const Grid& pred = batched.grids[i];
    s.accuracy = metrics::occupancy_accuracy(pred, targets[i]);
    s.iou = metrics::grid_iou(pred, targets[i]);
    s.soft_hard_iou = metrics::grid_iou(pred, tree::rasterize(batched.trees[i], options.resolution));
    s.tree_nodes = batched.trees[i].node_count();
    s.chamfer = surface_chamfer(pred, targets[i], options);
    acc.push_back(s.accuracy);
    iou.push_back(s.iou);
    shi.push_back(s.soft_hard_iou);
    if (s.chamfer) cd.push_back(*s.chamfer);
    report.samples.push_back(std::move(s));
  }
  report.mean_accuracy = mean(acc);
  report.mean_iou = mean(iou);
  report.mean_soft_hard_iou = mean(shi);
  report.min_soft_hard_iou = shi.empty() ? 0.0 : *std::min_element(shi.begin(), shi.end());
  if (!cd.empty()) report.mean_chamfer = mean(cd);
  return report;
}

SampleMetrics evaluate_tree_against(const tree::CsgTree& tree, const Grid& target, const Options& options) {
  if (tree.dim() != target.dim) throw std::invalid_argument("evaluate_tree_against: dimension mismatch");
  const Grid pred = tree::rasterize(tree, target.resolution);
  SampleMetrics s;
  s.accuracy = metrics::occupancy_accuracy(pred, target);
  s.iou = metrics::grid_iou(pred, target);
  s.soft_hard_iou = 1.0;
  s.tree_nodes = tree.node_count();
  s.chamfer = surface_chamfer(pred, target, options);
  return s;
}

}  // namespace ucsg::eval
