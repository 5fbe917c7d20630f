// repsim -- layer-wise representational similarity between dumped model
// activations, plus the surrounding batch tooling (activation statistics,
// detection evaluation, synthetic fixtures, SVG reports).
//
// Subcommands: compare, self, stats, regions, det map, gen, render.
// Every run writes <out>/run.json with the fully resolved configuration;
// `repsim --config run.json` reruns it and reproduces the outputs byte for
// byte. Exit codes: 0 ok, 2 invalid input, 3 computation error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "repsim/cli.hpp"
#include "repsim/version.hpp"

namespace {

void add_common_flags(CLI::App* cmd, repsim::RunConfig& cfg) {
  cmd->add_option("--topology", cfg.topology,
                  "Built-in topology name (yolov3) or a topology JSON file");
  cmd->add_option("--out", cfg.out_dir, "Output directory");
  cmd->add_option("--samples", cfg.samples, "Examples to use (seeded subsample)");
  cmd->add_option("--seed", cfg.seed, "Run seed for subsampling / generation");
}

}  // namespace

int main(int argc, char** argv) {
  repsim::RunConfig cfg;
  std::string config_path;

  CLI::App app{"layer-wise representational similarity toolkit"};
  app.set_version_flag("--version", std::string("repsim ") + repsim::kVersion);
  app.add_option("--config", config_path,
                 "Run a previously written run.json instead of flags");
  app.require_subcommand(0, 1);

  auto* compare = app.add_subcommand(
      "compare", "Layer-wise similarity between two activation dumps");
  compare->add_option("--manifest-a", cfg.manifest_a, "First model manifest")
      ->required();
  compare->add_option("--manifest-b", cfg.manifest_b, "Second model manifest")
      ->required();
  compare->add_option("--metric", cfg.metric, "cka (default), svcca or pwcca");
  compare->add_option("--variance-kept", cfg.variance_kept,
                      "SVCCA variance threshold");
  compare->add_flag("--both-orders", cfg.both_orders,
                    "Also report PWCCA with the arguments swapped");
  add_common_flags(compare, cfg);

  auto* self = app.add_subcommand(
      "self", "Layer-vs-layer self-similarity of one activation dump");
  self->add_option("--manifest-a", cfg.manifest_a, "Model manifest")->required();
  self->add_option("--metric", cfg.metric, "cka (default), svcca or pwcca");
  self->add_option("--variance-kept", cfg.variance_kept,
                   "SVCCA variance threshold");
  add_common_flags(self, cfg);

  auto* stats = app.add_subcommand("stats", "Per-layer activation statistics");
  stats->add_option("--manifest-a,--manifest", cfg.manifest_a, "Model manifest")
      ->required();
  stats->add_flag("--pooled", cfg.pooled_stats,
                  "Summary row pools all values instead of averaging per layer");
  add_common_flags(stats, cfg);

  auto* regions = app.add_subcommand(
      "regions", "Region means (all/backbone/head) of an existing curve CSV");
  regions->add_option("--curve", cfg.curve_in, "Curve CSV file")->required();
  regions->add_option("--metric", cfg.metric, "Metric label for the report");
  add_common_flags(regions, cfg);

  auto* det = app.add_subcommand("det", "Detection evaluation");
  auto* det_map = det->add_subcommand(
      "map", "mAP@0.5 with label mapping and small-box filtering");
  det_map->add_option("--gt", cfg.gt_path, "Ground-truth boxes (JSON lines)")
      ->required();
  det_map->add_option("--pred", cfg.pred_path, "Predicted boxes (JSON lines)")
      ->required();
  det_map->add_option("--label-map", cfg.label_map,
                      "Built-in map (bdd, gtav) or a JSON file");
  det_map->add_option("--min-area", cfg.min_area,
                      "Drop boxes with area strictly below this (px^2)");
  add_common_flags(det_map, cfg);

  auto* gen = app.add_subcommand(
      "gen", "Generate a deterministic synthetic model pair");
  gen->add_option("--scheme", cfg.scheme,
                  "independent, shared_prefix or planted_peaks");
  gen->add_option("--k", cfg.shared_k, "Shared prefix length");
  gen->add_option("--planted", cfg.planted, "Planted peak layer indices");
  gen->add_option("--height", cfg.gen_h, "Tensor h");
  gen->add_option("--width", cfg.gen_w, "Tensor w");
  gen->add_option("--channels", cfg.gen_c, "Tensor c");
  add_common_flags(gen, cfg);

  auto* render = app.add_subcommand("render", "Render existing CSVs to SVG");
  render->add_option("--curve", cfg.curve_in, "Curve CSV file");
  render->add_option("--matrix", cfg.matrix_in, "Matrix CSV file");
  render->add_option("--metric", cfg.metric, "Metric label for the report");
  add_common_flags(render, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      if (app.get_subcommands().size() > 0)
        throw repsim::InputError("--config replaces the subcommand and flags");
      repsim::run_config(repsim::load_run_config(config_path));
      return 0;
    }
    if (compare->parsed())
      cfg.subcommand = "compare";
    else if (self->parsed())
      cfg.subcommand = "self";
    else if (stats->parsed())
      cfg.subcommand = "stats";
    else if (regions->parsed())
      cfg.subcommand = "regions";
    else if (det->parsed() && det_map->parsed())
      cfg.subcommand = "det map";
    else if (gen->parsed())
      cfg.subcommand = "gen";
    else if (render->parsed())
      cfg.subcommand = "render";
    else {
      std::cerr << app.help();
      return 2;
    }
    repsim::run_config(cfg);
    return 0;
  } catch (const repsim::ComputationError& e) {
    std::cerr << "repsim: " << e.what() << '\n';
    return 3;
  } catch (const repsim::InputError& e) {
    std::cerr << "repsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "repsim: " << e.what() << '\n';
    return 2;
  }
}
