#ifndef REPSIM_CLI_HPP
#define REPSIM_CLI_HPP

// The batch command layer. Every run resolves its options into a RunConfig,
// writes it back out as <out>/run.json (tool version included, no
// timestamps), and produces outputs that are a pure function of that
// config and the input files -- rerunning a run.json must reproduce every
// CSV/SVG/JSON byte for byte.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/detection.hpp"
#include "repsim/errors.hpp"
#include "repsim/fixtures.hpp"
#include "repsim/manifest.hpp"
#include "repsim/npy.hpp"
#include "repsim/pipeline.hpp"
#include "repsim/render.hpp"
#include "repsim/stats.hpp"
#include "repsim/topology.hpp"
#include "repsim/version.hpp"

namespace repsim {

struct RunConfig {
  std::string subcommand;
  std::string manifest_a;
  std::string manifest_b;
  std::string metric = "cka";
  std::string topology = "yolov3";
  std::string out_dir;
  std::int64_t samples = 200;
  bool pooled_stats = false;
  std::uint64_t seed = 0;
  bool both_orders = false;
  double variance_kept = kDefaultVarianceKept;
  // det map
  std::string gt_path;
  std::string pred_path;
  std::string label_map = "bdd";
  double min_area = 0.0;
  // gen
  std::string scheme = "shared_prefix";
  int shared_k = 13;
  std::vector<int> planted;
  std::int64_t gen_h = 2;
  std::int64_t gen_w = 2;
  std::int64_t gen_c = 16;
  // regions / render inputs
  std::string curve_in;
  std::string matrix_in;
};

inline nlohmann::json config_to_json(const RunConfig& c) {
  return {{"subcommand", c.subcommand},
          {"manifest_a", c.manifest_a},
          {"manifest_b", c.manifest_b},
          {"metric", c.metric},
          {"topology", c.topology},
          {"out", c.out_dir},
          {"samples", c.samples},
          {"pooled_stats", c.pooled_stats},
          {"seed", c.seed},
          {"both_orders", c.both_orders},
          {"variance_kept", c.variance_kept},
          {"gt", c.gt_path},
          {"pred", c.pred_path},
          {"label_map", c.label_map},
          {"min_area", c.min_area},
          {"scheme", c.scheme},
          {"shared_k", c.shared_k},
          {"planted", c.planted},
          {"gen_h", c.gen_h},
          {"gen_w", c.gen_w},
          {"gen_c", c.gen_c},
          {"curve", c.curve_in},
          {"matrix", c.matrix_in}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.subcommand = j.at("subcommand").get<std::string>();
  c.manifest_a = j.at("manifest_a").get<std::string>();
  c.manifest_b = j.at("manifest_b").get<std::string>();
  c.metric = j.at("metric").get<std::string>();
  c.topology = j.at("topology").get<std::string>();
  c.out_dir = j.at("out").get<std::string>();
  c.samples = j.at("samples").get<std::int64_t>();
  c.pooled_stats = j.at("pooled_stats").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.both_orders = j.at("both_orders").get<bool>();
  c.variance_kept = j.at("variance_kept").get<double>();
  c.gt_path = j.at("gt").get<std::string>();
  c.pred_path = j.at("pred").get<std::string>();
  c.label_map = j.at("label_map").get<std::string>();
  c.min_area = j.at("min_area").get<double>();
  c.scheme = j.at("scheme").get<std::string>();
  c.shared_k = j.at("shared_k").get<int>();
  c.planted = j.at("planted").get<std::vector<int>>();
  c.gen_h = j.at("gen_h").get<std::int64_t>();
  c.gen_w = j.at("gen_w").get<std::int64_t>();
  c.gen_c = j.at("gen_c").get<std::int64_t>();
  c.curve_in = j.at("curve").get<std::string>();
  c.matrix_in = j.at("matrix").get<std::string>();
  return c;
}

namespace detail {

// All numeric report output is pinned to 9 significant digits.
inline double round9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

inline void write_run_json(const RunConfig& c) {
  nlohmann::json j = {{"tool", "repsim"},
                      {"version", kVersion},
                      {"subcommand", c.subcommand},
                      {"options", config_to_json(c)}};
  write_json(j, std::filesystem::path(c.out_dir) / "run.json");
}

inline void ensure_out_dir(const RunConfig& c) {
  if (c.out_dir.empty()) throw InputError("--out directory is required");
  std::filesystem::create_directories(c.out_dir);
}

inline nlohmann::json regions_json(std::span<const double> curve,
                                   const NetworkTopology& topo,
                                   const std::string& model_a,
                                   const std::string& model_b,
                                   const std::string& metric) {
  return {{"model_a", model_a},
          {"model_b", model_b},
          {"metric", metric},
          {"all", round9(region_mean(curve, topo, RegionSelector::all))},
          {"backbone", round9(region_mean(curve, topo, RegionSelector::backbone))},
          {"head", round9(region_mean(curve, topo, RegionSelector::head))}};
}

// Maximal runs of layers not interrupted by a route or detection layer;
// those interrupting indices are where the layer-vs-layer grid splits.
inline nlohmann::json blocks_json(const NetworkTopology& topo) {
  auto blocks = nlohmann::json::array();
  auto separators = nlohmann::json::array();
  int run_start = -1;
  for (const auto& l : topo.layers) {
    const bool split =
        l.kind == LayerKind::route || l.kind == LayerKind::detection;
    if (split) {
      if (run_start >= 0)
        blocks.push_back({{"first", run_start}, {"last", l.index - 1}});
      separators.push_back(l.index);
      run_start = -1;
    } else if (run_start < 0) {
      run_start = l.index;
    }
  }
  if (run_start >= 0)
    blocks.push_back(
        {{"first", run_start}, {"last", static_cast<int>(topo.size()) - 1}});
  return {{"blocks", blocks}, {"separators", separators}};
}

inline nlohmann::json annotations_json(std::span<const double> curve,
                                       const NetworkTopology& topo) {
  const CurveAnnotations ann = annotate(curve, topo);
  auto rows = nlohmann::json::array();
  for (const auto& r : ann.rows)
    rows.push_back({{"index", r.index},
                    {"kind", kind_name(r.kind)},
                    {"region", region_name(r.region)},
                    {"score", round9(r.score)},
                    {"peak", r.peak}});
  nlohmann::json j = {{"layers", rows},
                      {"peaks", ann.peaks},
                      {"residual_peaks", ann.residual_peaks}};
  j.update(blocks_json(topo));
  return j;
}

struct LoadedPair {
  ActivationSet a, b;
  NetworkTopology topo;
};

// Shared front half of compare/self: load, length/batch checks, seeded
// subsampling applied identically to both sets.
inline LoadedPair load_for_compare(const RunConfig& c, bool self) {
  LoadedPair p;
  p.topo = resolve_topology(c.topology);
  p.a = load_set(c.manifest_a);
  p.b = self ? p.a : load_set(c.manifest_b);
  if (self) p.b.model_id = p.a.model_id;

  if (p.a.layers.empty()) throw EmptySet("manifest has no layers");
  if (p.a.size() != p.topo.size() || p.b.size() != p.topo.size())
    throw LengthMismatch("models have " + std::to_string(p.a.size()) + "/" +
                         std::to_string(p.b.size()) + " layers but topology '" +
                         p.topo.name + "' has " + std::to_string(p.topo.size()));
  if (p.a.examples() != p.b.examples())
    throw InconsistentBatch("models dumped different example counts: " +
                            std::to_string(p.a.examples()) + " vs " +
                            std::to_string(p.b.examples()));
  if (p.a.examples() < 2)
    throw TooFewRows("similarity needs at least 2 examples, dumps have " +
                     std::to_string(p.a.examples()));
  if (c.samples < 2) throw InputError("--samples must be at least 2");

  const auto rows = subsample_indices(p.a.examples(), c.samples, c.seed);
  if (static_cast<std::int64_t>(rows.size()) < p.a.examples()) {
    p.a = subsample_rows(p.a, rows);
    p.b = subsample_rows(p.b, rows);
  }
  return p;
}

}  // namespace detail

inline void run_compare(const RunConfig& c, bool self) {
  detail::ensure_out_dir(c);
  auto [set_a, set_b, topo] = detail::load_for_compare(c, self);

  MetricOptions opts;
  opts.metric = metric_from_name(c.metric);
  opts.variance_kept = c.variance_kept;

  const auto cache_a = prepare_layers(set_a, opts);
  std::vector<LayerCache> cache_b_storage;
  if (!self) cache_b_storage = prepare_layers(set_b, opts);
  const auto& cache_b = self ? cache_a : cache_b_storage;

  const std::vector<double> curve = compute_curve(cache_a, cache_b, opts);
  SimilarityMatrix matrix =
      compute_matrix(cache_a, cache_b, opts, set_a.model_id, set_b.model_id);

  const std::filesystem::path out(c.out_dir);
  detail::write_run_json(c);
  write_text_file(curve_csv(curve), out / "curve.csv");
  write_text_file(matrix_csv(matrix), out / "matrix.csv");
  write_text_file(render_curve_svg({{matrix.model_a + " vs " + matrix.model_b, curve}}, topo),
                  out / "curve.svg");
  write_text_file(render_heatmap_svg(matrix, topo, topo), out / "matrix.svg");
  detail::write_json(detail::regions_json(curve, topo, matrix.model_a,
                                          matrix.model_b, matrix.metric),
                     out / "regions.json");
  detail::write_json(detail::annotations_json(curve, topo),
                     out / "annotations.json");

  if (c.both_orders && opts.metric == Metric::pwcca) {
    std::vector<double> reverse(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
      reverse[i] = pair_score(cache_b[i], cache_a[i], opts);
    write_text_file(curve_csv(reverse), out / "curve_ba.csv");
    detail::write_json(detail::regions_json(reverse, topo, matrix.model_b,
                                            matrix.model_a, matrix.metric),
                       out / "regions_ba.json");
  }
}

inline void run_stats(const RunConfig& c) {
  detail::ensure_out_dir(c);
  ActivationSet set = load_set(c.manifest_a);
  if (c.samples < 2) throw InputError("--samples must be at least 2");
  const auto rows = subsample_indices(set.examples(), c.samples, c.seed);
  if (static_cast<std::int64_t>(rows.size()) < set.examples())
    set = subsample_rows(set, rows);
  const ModelStats stats = model_stats(
      set, c.pooled_stats ? StatsAveraging::pooled : StatsAveraging::per_layer);
  detail::write_run_json(c);
  std::ofstream out(std::filesystem::path(c.out_dir) / "stats.csv",
                    std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write stats.csv");
  write_stats_csv(stats, out);
}

inline void run_regions(const RunConfig& c) {
  detail::ensure_out_dir(c);
  if (c.curve_in.empty()) throw InputError("regions needs --curve");
  const auto curve = read_curve_csv(c.curve_in);
  const auto topo = resolve_topology(c.topology);
  detail::write_run_json(c);
  detail::write_json(
      detail::regions_json(curve, topo,
                           std::filesystem::path(c.curve_in).stem().string(), "",
                           metric_name(metric_from_name(c.metric))),
      std::filesystem::path(c.out_dir) / "regions.json");
}

inline void run_det_map(const RunConfig& c) {
  detail::ensure_out_dir(c);
  if (c.gt_path.empty() || c.pred_path.empty())
    throw InputError("det map needs --gt and --pred");
  const LabelMap map = resolve_label_map(c.label_map);

  auto gt = filter_small(map_labels(load_boxes(c.gt_path), map), c.min_area);
  auto pred = filter_small(map_labels(load_boxes(c.pred_path), map), c.min_area);
  const EvalResult result = map_at_50(gt, pred);

  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& ap : result.per_class)
    per_class[ap.label] = {{"ap", detail::round9(ap.ap)},
                           {"n_gt", ap.n_gt},
                           {"n_pred", ap.n_pred}};
  const nlohmann::json j = {{"map", detail::round9(result.map)},
                            {"classes", per_class},
                            {"excluded", result.excluded},
                            {"label_map", map.name},
                            {"min_area", c.min_area},
                            {"iou_threshold", 0.5}};
  detail::write_run_json(c);
  detail::write_json(j, std::filesystem::path(c.out_dir) / "detection.json");
}

inline void run_gen(const RunConfig& c) {
  detail::ensure_out_dir(c);
  const auto topo = resolve_topology(c.topology);

  GeneratorSpec spec;
  spec.seed = c.seed;
  spec.shapes = uniform_shapes(topo.size(), c.samples, c.gen_h, c.gen_w, c.gen_c);
  if (c.scheme == "independent") {
    spec.scheme = Scheme::independent;
  } else if (c.scheme == "shared_prefix") {
    spec.scheme = Scheme::shared_prefix;
    spec.shared_prefix = c.shared_k;
  } else if (c.scheme == "planted_peaks") {
    spec.scheme = Scheme::planted_peaks;
    spec.planted = c.planted;
  } else {
    throw InputError("unknown scheme '" + c.scheme + "'");
  }

  auto [a, b] = gen_model_pair(spec);
  const std::filesystem::path out(c.out_dir);
  detail::write_run_json(c);
  for (const auto* set : {&a, &b}) {
    const auto dir = out / (set == &a ? "model_a" : "model_b");
    std::filesystem::create_directories(dir);
    ActivationManifest m;
    m.model_id = set->model_id;
    m.seed = static_cast<std::int64_t>(c.seed);
    m.input_size = spec.input_size;
    for (const auto& t : set->layers) {
      char name[32];
      std::snprintf(name, sizeof name, "layer_%03d.npy", t.layer_index);
      npy::save_tensor(t, dir / name);
      m.entries.push_back({t.layer_index, name, t.shape});
    }
    save_manifest(m, dir / "manifest.json");
  }
}

inline void run_render(const RunConfig& c) {
  detail::ensure_out_dir(c);
  if (c.curve_in.empty() && c.matrix_in.empty())
    throw InputError("render needs --curve and/or --matrix");
  const auto topo = resolve_topology(c.topology);
  const std::filesystem::path out(c.out_dir);
  detail::write_run_json(c);
  if (!c.curve_in.empty()) {
    const auto curve = read_curve_csv(c.curve_in);
    const auto label = std::filesystem::path(c.curve_in).stem().string();
    write_text_file(render_curve_svg({{label, curve}}, topo), out / "curve.svg");
  }
  if (!c.matrix_in.empty()) {
    SimilarityMatrix m;
    m.values = read_matrix_csv(c.matrix_in);
    m.model_a = std::filesystem::path(c.matrix_in).stem().string();
    m.model_b = m.model_a;
    m.metric = c.metric;
    write_text_file(render_heatmap_svg(m, topo, topo), out / "matrix.svg");
  }
}

/// Executes one resolved configuration. This is what both the flag parser
/// and `--config run.json` funnel into.
inline void run_config(const RunConfig& c) {
  if (c.subcommand == "compare")
    run_compare(c, /*self=*/false);
  else if (c.subcommand == "self")
    run_compare(c, /*self=*/true);
  else if (c.subcommand == "stats")
    run_stats(c);
  else if (c.subcommand == "regions")
    run_regions(c);
  else if (c.subcommand == "det map")
    run_det_map(c);
  else if (c.subcommand == "gen")
    run_gen(c);
  else if (c.subcommand == "render")
    run_render(c);
  else
    throw InputError("unknown subcommand '" + c.subcommand + "'");
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return config_from_json(j.contains("options") ? j.at("options") : j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace repsim

#endif  // REPSIM_CLI_HPP
