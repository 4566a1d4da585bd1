// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: generate-data, train, eval, extract-tree, render.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ucsg/checkpoint.hpp"
#include "ucsg/config.hpp"
#include "ucsg/contour.hpp"
#include "ucsg/evaluate.hpp"
#include "ucsg/io.hpp"
#include "ucsg/training.hpp"
#include "ucsg/tree.hpp"

namespace fs = std::filesystem;
using namespace ucsg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --seed, else the configured seed, else UCSG_SEED, else 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const std::optional<std::uint64_t>& configured) {
  if (flag) return *flag;
  if (configured) return *configured;
  if (const char* env = std::getenv("UCSG_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      if (text.front() == '-') throw std::invalid_argument(text);
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::logic_error&) {
      throw UsageError(std::string("UCSG_SEED is not a non-negative integer: '") + env + "'");
    }
  }
  return 0;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::DataError(io::DataError::Kind::NotFound, path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io::DataError(io::DataError::Kind::NotFound, path.string() + ": cannot create file");
  out << text;
}

/// Writes to `path`, or to standard output when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text(path, text);
}

Grid read_raster(const fs::path& path, std::size_t resolution) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return io::read_pgm(path, resolution);
  if (ext == ".vox") return io::read_voxels(path, resolution);
  throw UsageError(path.string() + ": raster must be a .pgm or .vox file");
}

tree::CsgTree read_tree(const fs::path& path) {
  try {
    return tree::deserialize_tree(read_text(path));
  } catch (const tree::ParseError& e) {
    throw io::DataError(io::DataError::Kind::Format, path.string() + ": " + e.what());
  }
}

// generate-data

struct GenerateArgs {
  std::size_t n = 256;
  std::optional<std::uint64_t> seed;
  std::string out;
  int dim = 2;
  std::size_t resolution = 64;
  std::size_t min_primitives = 2;
  std::size_t max_primitives = 4;
};

int run_generate(const GenerateArgs& a) {
  io::SyntheticOptions o;
  o.count = a.n;
  o.seed = resolve_seed(a.seed, std::nullopt);
  o.dim = a.dim;
  o.resolution = a.resolution;
  o.min_primitives = a.min_primitives;
  o.max_primitives = a.max_primitives;
  if (o.min_primitives < 1 || o.min_primitives > o.max_primitives)
    throw UsageError("--min-primitives must be at least 1 and at most --max-primitives");
  io::write_synthetic(a.out, io::generate_synthetic(o), o);
  std::cerr << "wrote " << o.count << " samples to " << a.out << "\n";
  return 0;
}

// train

struct TrainArgs {
  std::string data;
  std::string config;
  std::string preset;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::string sampling;
  std::optional<std::uint64_t> seed;
  std::string out = "checkpoint";
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  config::RunConfig rc;
  if (!a.config.empty()) rc = config::load_toml(a.config);
  if (!a.preset.empty()) {
    if (!a.config.empty()) throw UsageError("--preset and --config are mutually exclusive");
    rc.preset = a.preset;
    rc.model = config::preset(a.preset);
  }
  nlohmann::json overrides = nlohmann::json::object();
  if (a.epochs) overrides["max_epochs"] = *a.epochs;
  if (a.lr) overrides["learning_rate"] = *a.lr;
  if (a.batch_size) overrides["batch_size"] = *a.batch_size;
  if (!a.sampling.empty()) overrides["sampling"] = a.sampling;
  config::apply_train(overrides, rc.train);
  rc.train.seed = resolve_seed(a.seed, rc.seed_set ? std::optional(rc.train.seed) : std::nullopt);
  try {
    rc.model.validate();
    rc.train.validate(rc.model.csg.alpha_init);
  } catch (const std::invalid_argument& e) {
    throw config::ConfigError(e.what());
  }

  const auto ds = io::load_dataset_auto(a.data, rc.model.encoder.resolution);
  for (const auto& g : ds.grids)
    if (g.dim != rc.model.dim())
      throw io::DataError(io::DataError::Kind::Dimension,
                          a.data + ": dataset is " + std::to_string(g.dim) + "-D but the model is " +
                              std::to_string(rc.model.dim()) + "-D");

  net::Model model(rc.model, rc.train.seed);
  train::Trainer trainer(model, ds.grids, rc.train);
  fs::create_directories(a.out);
  const fs::path log_path = fs::path(a.out) / "train_log.jsonl";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw io::DataError(io::DataError::Kind::NotFound, log_path.string() + ": cannot create file");
  trainer.on_epoch = [&](const train::EpochRecord& r) {
    log << r.to_json().dump() << "\n";
    log.flush();
    if (!a.quiet)
      std::cerr << "epoch " << r.epoch << " stage " << r.stage << " loss " << r.loss_total << " alpha " << r.alpha
                << "\n";
  };
  const auto report = trainer.train();
  checkpoint::save(a.out, model, rc.train, &trainer);

  nlohmann::json summary = {{"epochs", report.epochs.size()},
                            {"final_stage", report.final_stage},
                            {"stage_flip_epoch", report.stage_flip_epoch},
                            {"stop_reason", report.stop_reason},
                            {"seed", rc.train.seed},
                            {"checkpoint", a.out}};
  if (!report.epochs.empty()) summary["final"] = report.epochs.back().to_json();
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string tree;
  std::string raster;
  std::size_t resolution = 64;
  std::size_t points = 4096;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  eval::Options o;
  o.surface_points = a.points;
  o.seed = resolve_seed(a.seed, std::nullopt);
  if (!a.tree.empty()) {
    if (a.raster.empty()) throw UsageError("--tree requires --raster");
    const auto t = read_tree(a.tree);
    const Grid target = read_raster(a.raster, a.resolution);
    o.resolution = target.resolution;
    auto m = eval::evaluate_tree_against(t, target, o);
    m.name = fs::path(a.raster).stem().string();
    emit(a.out, m.to_json().dump(2) + "\n");
    return 0;
  }
  if (a.checkpoint.empty()) throw UsageError("eval needs --checkpoint with --data, or --tree with --raster");
  if (a.data.empty() && a.raster.empty()) throw UsageError("--checkpoint requires --data or --raster");
  const auto loaded = checkpoint::load(a.checkpoint);
  const std::size_t r = loaded.model_config.encoder.resolution;
  io::Dataset ds;
  if (!a.raster.empty()) {
    ds.grids.push_back(read_raster(a.raster, r));
    ds.names.push_back(fs::path(a.raster).stem().string());
  } else {
    ds = io::load_dataset_auto(a.data, r);
  }
  o.resolution = r;
  emit(a.out, eval::evaluate_model(*loaded.model, ds.grids, ds.names, o).to_json().dump(2) + "\n");
  return 0;
}

// extract-tree

struct ExtractArgs {
  std::string checkpoint;
  std::string data;
  std::string raster;
  std::size_t sample = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_extract(const ExtractArgs& a) {
  (void)resolve_seed(a.seed, std::nullopt);
  if (a.data.empty() == a.raster.empty()) throw UsageError("extract-tree needs exactly one of --data or --raster");
  const auto loaded = checkpoint::load(a.checkpoint);
  const std::size_t r = loaded.model_config.encoder.resolution;
  Grid input;
  if (!a.raster.empty()) {
    input = read_raster(a.raster, r);
  } else {
    const auto ds = io::load_dataset_auto(a.data, r);
    if (a.sample >= ds.grids.size())
      throw UsageError("--sample " + std::to_string(a.sample) + " is out of range (dataset has " +
                       std::to_string(ds.grids.size()) + " samples)");
    input = ds.grids[a.sample];
  }
  if (input.dim != loaded.model_config.dim())
    throw io::DataError(io::DataError::Kind::Dimension, "input dimension does not match the checkpoint model");
  const auto t = tree::extract_tree(*loaded.model, train::batch_input({input}, {0}), 0);
  emit(a.out, tree::serialize_tree(t) + "\n");
  return 0;
}

// render

struct RenderArgs {
  std::string tree;
  std::string out;
  std::size_t resolution = 256;
  std::size_t size = 512;
  std::optional<std::uint64_t> seed;
};

int run_render(const RenderArgs& a) {
  (void)resolve_seed(a.seed, std::nullopt);
  const auto t = read_tree(a.tree);
  const auto ext = fs::path(a.out).extension().string();
  if (t.dim() == 2 && ext != ".svg") throw UsageError("2-D trees render to .svg");
  if (t.dim() == 3 && ext != ".obj") throw UsageError("3-D trees render to .obj");
  const auto field = contour::occupancy_field(tree::rasterize(t, a.resolution));
  if (t.dim() == 2)
    write_text(a.out, contour::to_svg(contour::marching_squares(field), a.size));
  else
    write_text(a.out, contour::to_obj(contour::marching_cubes(field)));
  return 0;
}

void add_seed(CLI::App* cmd, std::optional<std::uint64_t>& seed) {
  cmd->add_option("--seed", seed, "Random seed (default: config file, then UCSG_SEED, then 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised CSG parsing of binary shapes"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "Write a synthetic corpus of CSG shapes");
  g->add_option("--n", gen.n, "Number of samples")->check(CLI::PositiveNumber);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--dim", gen.dim, "2 or 3")->check(CLI::IsMember({2, 3}));
  g->add_option("--resolution", gen.resolution, "Raster resolution")->check(CLI::PositiveNumber);
  g->add_option("--min-primitives", gen.min_primitives, "Fewest primitives per shape");
  g->add_option("--max-primitives", gen.max_primitives, "Most primitives per shape");
  add_seed(g, gen.seed);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model and write a checkpoint directory");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--config", tr.config, "TOML configuration file");
  t->add_option("--preset", tr.preset, "paper_2d, paper_3d or desk_2d");
  t->add_option("--epochs", tr.epochs, "Maximum number of epochs")->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  t->add_option("--batch-size", tr.batch_size, "Shapes per batch")->check(CLI::PositiveNumber);
  t->add_option("--sampling", tr.sampling, "exhaustive or boundary_biased")
      ->check(CLI::IsMember({"exhaustive", "boundary_biased"}));
  t->add_option("--out", tr.out, "Checkpoint directory");
  t->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress");
  add_seed(t, tr.seed);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compute reconstruction metrics as JSON");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory");
  e->add_option("--data", ev.data, "Dataset directory");
  e->add_option("--tree", ev.tree, "Tree document evaluated instead of a model");
  e->add_option("--raster", ev.raster, "Single .pgm or .vox target");
  e->add_option("--resolution", ev.resolution, "Raster resolution for --tree")->check(CLI::PositiveNumber);
  e->add_option("--points", ev.points, "Surface samples for the Chamfer distance")->check(CLI::PositiveNumber);
  e->add_option("--out", ev.out, "Output file (default: standard output)");
  add_seed(e, ev.seed);

  ExtractArgs ex;
  auto* x = app.add_subcommand("extract-tree", "Extract the CSG tree of one shape as JSON");
  x->add_option("--checkpoint", ex.checkpoint, "Checkpoint directory")->required();
  x->add_option("--data", ex.data, "Dataset directory");
  x->add_option("--sample", ex.sample, "Sample index within --data");
  x->add_option("--raster", ex.raster, "Single .pgm or .vox input");
  x->add_option("--out", ex.out, "Output file (default: standard output)");
  add_seed(x, ex.seed);

  RenderArgs rd;
  auto* r = app.add_subcommand("render", "Contour a tree to SVG (2-D) or OBJ (3-D)");
  r->add_option("--tree", rd.tree, "Tree document")->required();
  r->add_option("--out", rd.out, "Output .svg or .obj file")->required();
  r->add_option("--resolution", rd.resolution, "Sampling grid resolution")->check(CLI::Range(8, 4096));
  r->add_option("--size", rd.size, "SVG canvas size in pixels")->check(CLI::PositiveNumber);
  add_seed(r, rd.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*x) return run_extract(ex);
    if (*r) return run_render(rd);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
