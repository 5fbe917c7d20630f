#ifndef REPSIM_TOPOLOGY_HPP
#define REPSIM_TOPOLOGY_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/errors.hpp"

namespace repsim {

enum class LayerKind { convolution, residual, route, upsample, detection };
enum class Region { backbone, head };
enum class Kernel { k1x1, k3x3 };

inline const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::convolution: return "convolution";
    case LayerKind::residual: return "residual";
    case LayerKind::route: return "route";
    case LayerKind::upsample: return "upsample";
    case LayerKind::detection: return "detection";
  }
  return "?";
}

inline LayerKind kind_from_name(const std::string& s) {
  if (s == "convolution") return LayerKind::convolution;
  if (s == "residual") return LayerKind::residual;
  if (s == "route") return LayerKind::route;
  if (s == "upsample") return LayerKind::upsample;
  if (s == "detection") return LayerKind::detection;
  throw InputError("unknown layer kind '" + s + "'");
}

inline const char* region_name(Region r) {
  return r == Region::backbone ? "backbone" : "head";
}

inline Region region_from_name(const std::string& s) {
  if (s == "backbone") return Region::backbone;
  if (s == "head") return Region::head;
  throw InputError("unknown region '" + s + "'");
}

struct LayerDescriptor {
  int index = 0;
  LayerKind kind = LayerKind::convolution;
  Region region = Region::backbone;
  std::optional<Kernel> kernel;  // convolutions only
  bool downscales = false;
  std::vector<int> links;  // residual: 2 sources, route: 1-2, others: none
};

struct NetworkTopology {
  std::string name;
  std::vector<LayerDescriptor> layers;

  std::size_t size() const { return layers.size(); }

  std::vector<int> indices_of(LayerKind k) const {
    std::vector<int> out;
    for (const auto& l : layers)
      if (l.kind == k) out.push_back(l.index);
    return out;
  }

  void validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.index != static_cast<int>(i))
        throw InputError("topology '" + name + "': layer indices must be 0.." +
                         std::to_string(layers.size() - 1) + " without gaps");
      const std::size_t want_min = l.kind == LayerKind::residual ? 2
                                   : l.kind == LayerKind::route  ? 1
                                                                 : 0;
      const std::size_t want_max = l.kind == LayerKind::residual ? 2
                                   : l.kind == LayerKind::route  ? 2
                                                                 : 0;
      if (l.links.size() < want_min || l.links.size() > want_max)
        throw InputError("topology '" + name + "': layer " +
                         std::to_string(l.index) + " has " +
                         std::to_string(l.links.size()) + " links");
      for (int src : l.links)
        if (src < 0 || src >= l.index)
          throw InputError("topology '" + name + "': link " +
                           std::to_string(src) + " does not precede layer " +
                           std::to_string(l.index));
    }
  }
};

namespace detail {

inline LayerDescriptor conv(int index, Region region, Kernel kernel,
                            bool downscales = false) {
  LayerDescriptor l;
  l.index = index;
  l.kind = LayerKind::convolution;
  l.region = region;
  l.kernel = kernel;
  l.downscales = downscales;
  return l;
}

inline LayerDescriptor simple(int index, LayerKind kind, Region region,
                              std::vector<int> links = {}) {
  LayerDescriptor l;
  l.index = index;
  l.kind = kind;
  l.region = region;
  l.links = std::move(links);
  return l;
}

}  // namespace detail

/// The 107-layer YOLOv3 graph. The backbone (Darknet-53, layers 0-74) is a
/// leading 3x3 convolution followed by five stages, each a strided 3x3
/// downscale convolution plus a run of residual blocks (1x1 conv, 3x3 conv,
/// shortcut). The head (75-106) carries three detection branches at falling
/// scales, joined by route layers 83/86/95/98 and upsamples 85/97.
inline NetworkTopology yolov3_topology() {
  using detail::conv;
  using detail::simple;
  NetworkTopology topo;
  topo.name = "yolov3";
  auto& L = topo.layers;

  int i = 0;
  L.push_back(conv(i++, Region::backbone, Kernel::k3x3));  // layer 0
  for (int blocks : {1, 2, 8, 8, 4}) {
    L.push_back(conv(i++, Region::backbone, Kernel::k3x3, /*downscales=*/true));
    for (int b = 0; b < blocks; ++b) {
      L.push_back(conv(i++, Region::backbone, Kernel::k1x1));
      L.push_back(conv(i++, Region::backbone, Kernel::k3x3));
      L.push_back(simple(i, LayerKind::residual, Region::backbone,
                         {i - 1, i - 3}));
      ++i;
    }
  }

  // One detection branch: alternating 1x1/3x3 convolutions ending in the
  // 1x1 prediction convolution, then the detection grid itself.
  auto branch = [&](int convs) {
    for (int c = 0; c < convs; ++c)
      L.push_back(conv(i++, Region::head,
                       c % 2 == 0 ? Kernel::k1x1 : Kernel::k3x3));
    L.push_back(simple(i++, LayerKind::detection, Region::head));
  };

  branch(7);                                                    // 75-82
  L.push_back(simple(i, LayerKind::route, Region::head, {i - 4}));  // 83
  ++i;
  L.push_back(conv(i++, Region::head, Kernel::k1x1));           // 84
  L.push_back(simple(i++, LayerKind::upsample, Region::head));  // 85
  L.push_back(simple(i, LayerKind::route, Region::head, {i - 1, 61}));  // 86
  ++i;
  branch(7);                                                    // 87-94
  L.push_back(simple(i, LayerKind::route, Region::head, {i - 4}));  // 95
  ++i;
  L.push_back(conv(i++, Region::head, Kernel::k1x1));           // 96
  L.push_back(simple(i++, LayerKind::upsample, Region::head));  // 97
  L.push_back(simple(i, LayerKind::route, Region::head, {i - 1, 36}));  // 98
  ++i;
  branch(7);                                                    // 99-106

  topo.validate();
  return topo;
}

inline NetworkTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open topology " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    NetworkTopology topo;
    topo.name = j.at("name").get<std::string>();
    for (const auto& e : j.at("layers")) {
      LayerDescriptor l;
      l.index = e.at("index").get<int>();
      l.kind = kind_from_name(e.at("kind").get<std::string>());
      l.region = region_from_name(e.at("region").get<std::string>());
      l.links = e.at("links").get<std::vector<int>>();
      l.downscales = e.at("downscales").get<bool>();
      if (e.contains("kernel")) {
        const auto k = e.at("kernel").get<std::string>();
        if (k == "1x1")
          l.kernel = Kernel::k1x1;
        else if (k == "3x3")
          l.kernel = Kernel::k3x3;
        else
          throw InputError("unknown kernel '" + k + "'");
      }
      topo.layers.push_back(std::move(l));
    }
    topo.validate();
    return topo;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("topology " + path.string() + ": " + e.what());
  }
}

inline void save_topology(const NetworkTopology& topo,
                          const std::filesystem::path& path) {
  nlohmann::json j;
  j["name"] = topo.name;
  auto layers = nlohmann::json::array();
  for (const auto& l : topo.layers) {
    nlohmann::json e = {{"index", l.index},
                        {"kind", kind_name(l.kind)},
                        {"region", region_name(l.region)},
                        {"links", l.links},
                        {"downscales", l.downscales}};
    if (l.kernel) e["kernel"] = *l.kernel == Kernel::k1x1 ? "1x1" : "3x3";
    layers.push_back(std::move(e));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write topology " + path.string());
  out << j.dump(2) << '\n';
}

/// Resolves either a built-in topology name or a JSON file path.
inline NetworkTopology resolve_topology(const std::string& name_or_path) {
  if (name_or_path == "yolov3") return yolov3_topology();
  return load_topology(name_or_path);
}

enum class RegionSelector { all, backbone, head };

inline const char* region_selector_name(RegionSelector r) {
  switch (r) {
    case RegionSelector::all: return "all";
    case RegionSelector::backbone: return "backbone";
    case RegionSelector::head: return "head";
  }
  return "?";
}

/// Unweighted mean of the per-layer scores whose region matches.
inline double region_mean(std::span<const double> curve,
                          const NetworkTopology& topo, RegionSelector region) {
  if (curve.size() != topo.size())
    throw LengthMismatch("curve length " + std::to_string(curve.size()) +
                         " does not match topology length " +
                         std::to_string(topo.size()));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const bool take =
        region == RegionSelector::all ||
        (region == RegionSelector::backbone &&
         topo.layers[i].region == Region::backbone) ||
        (region == RegionSelector::head && topo.layers[i].region == Region::head);
    if (take) {
      sum += curve[i];
      ++count;
    }
  }
  if (count == 0) throw LengthMismatch("no layers in selected region");
  return sum / static_cast<double>(count);
}

struct AnnotatedLayer {
  int index = 0;
  LayerKind kind = LayerKind::convolution;
  Region region = Region::backbone;
  double score = 0.0;
  bool peak = false;  // strictly exceeds both neighbors
};

struct CurveAnnotations {
  std::vector<AnnotatedLayer> rows;
  std::vector<int> peaks;           // all local peaks
  std::vector<int> residual_peaks;  // peaks that land on residual layers
};

/// Tags each score with its layer kind/region and flags interior local
/// peaks, which is what makes the residual-layer pattern visible.
inline CurveAnnotations annotate(std::span<const double> curve,
                                 const NetworkTopology& topo) {
  if (curve.size() != topo.size())
    throw LengthMismatch("curve length " + std::to_string(curve.size()) +
                         " does not match topology length " +
                         std::to_string(topo.size()));
  CurveAnnotations out;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    AnnotatedLayer row;
    row.index = topo.layers[i].index;
    row.kind = topo.layers[i].kind;
    row.region = topo.layers[i].region;
    row.score = curve[i];
    row.peak = i > 0 && i + 1 < curve.size() && curve[i] > curve[i - 1] &&
               curve[i] > curve[i + 1];
    if (row.peak) {
      out.peaks.push_back(row.index);
      if (row.kind == LayerKind::residual)
        out.residual_peaks.push_back(row.index);
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace repsim

#endif  // REPSIM_TOPOLOGY_HPP
