#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <vector>

#include "repsim/topology.hpp"
#include "support.hpp"

using namespace repsim;
using testsupport::TempDir;

namespace {

const NetworkTopology& yolo() {
  static const NetworkTopology topo = yolov3_topology();
  return topo;
}

std::set<int> index_set(const NetworkTopology& t, LayerKind k) {
  const auto v = t.indices_of(k);
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("yolov3 kind counts are 75/23/4/2/3 over 107 layers") {
  REQUIRE(yolo().size() == 107);
  CHECK(yolo().indices_of(LayerKind::convolution).size() == 75);
  CHECK(yolo().indices_of(LayerKind::residual).size() == 23);
  CHECK(yolo().indices_of(LayerKind::route).size() == 4);
  CHECK(yolo().indices_of(LayerKind::upsample).size() == 2);
  CHECK(yolo().indices_of(LayerKind::detection).size() == 3);
}

TEST_CASE("yolov3 detection, downscale, route and upsample positions") {
  CHECK(index_set(yolo(), LayerKind::detection) == std::set<int>{82, 94, 106});
  CHECK(index_set(yolo(), LayerKind::route) == std::set<int>{83, 86, 95, 98});
  CHECK(index_set(yolo(), LayerKind::upsample) == std::set<int>{85, 97});

  std::set<int> downscales;
  for (const auto& l : yolo().layers)
    if (l.downscales) downscales.insert(l.index);
  CHECK(downscales == std::set<int>{1, 5, 12, 37, 62});
}

TEST_CASE("yolov3 residual indices match the reference table") {
  // Frozen after one-time verification against the reference Darknet
  // configuration: the residual ladder of Darknet-53.
  const std::set<int> expected = {4,  8,  11, 15, 18, 21, 24, 27,
                                  30, 33, 36, 40, 43, 46, 49, 52,
                                  55, 58, 61, 65, 68, 71, 74};
  CHECK(index_set(yolo(), LayerKind::residual) == expected);
}

TEST_CASE("yolov3 kernel split is 38 of 3x3 and 37 of 1x1") {
  int k3 = 0, k1 = 0;
  for (const auto& l : yolo().layers) {
    if (!l.kernel) continue;
    (*l.kernel == Kernel::k3x3 ? k3 : k1)++;
  }
  CHECK(k3 == 38);
  CHECK(k1 == 37);
  // Only convolutions carry kernels.
  for (const auto& l : yolo().layers)
    CHECK(l.kernel.has_value() == (l.kind == LayerKind::convolution));
}

TEST_CASE("yolov3 regions split at the backbone boundary") {
  for (const auto& l : yolo().layers)
    CHECK(l.region == (l.index <= 74 ? Region::backbone : Region::head));
  CHECK(yolo().layers[0].kind == LayerKind::convolution);
  CHECK(yolo().layers[82].kind == LayerKind::detection);
  CHECK(yolo().layers[82].region == Region::head);
}

TEST_CASE("yolov3 link structure") {
  // Route 86 concatenates the upsample with backbone layer 61; route 98
  // with backbone layer 36. Every link points strictly backwards.
  CHECK(yolo().layers[86].links == std::vector<int>{85, 61});
  CHECK(yolo().layers[98].links == std::vector<int>{97, 36});
  CHECK(yolo().layers[83].links == std::vector<int>{79});
  CHECK(yolo().layers[95].links == std::vector<int>{91});
  for (const auto& l : yolo().layers) {
    if (l.kind == LayerKind::residual) REQUIRE(l.links.size() == 2);
    for (int src : l.links) CHECK(src < l.index);
  }
  // Residual layers sum the previous layer with the block input.
  CHECK(yolo().layers[4].links == std::vector<int>{3, 1});
  CHECK(yolo().layers[74].links == std::vector<int>{73, 71});
}

TEST_CASE("topology JSON round trip") {
  TempDir dir("topo");
  const auto path = dir.path() / "yolov3.json";
  save_topology(yolo(), path);
  const auto back = load_topology(path);
  REQUIRE(back.size() == yolo().size());
  CHECK(back.name == "yolov3");
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.layers[i].kind == yolo().layers[i].kind);
    CHECK(back.layers[i].region == yolo().layers[i].region);
    CHECK(back.layers[i].links == yolo().layers[i].links);
    CHECK(back.layers[i].downscales == yolo().layers[i].downscales);
    CHECK(back.layers[i].kernel == yolo().layers[i].kernel);
  }
}

TEST_CASE("topology JSON without kernel keys loads fine") {
  // The interchange schema only requires index/kind/region/links/downscales.
  TempDir dir("topo_schema");
  const auto path = dir.path() / "min.json";
  {
    std::ofstream out(path);
    out << R"({"name": "mini", "layers": [
      {"index": 0, "kind": "convolution", "region": "backbone", "links": [], "downscales": false},
      {"index": 1, "kind": "detection", "region": "head", "links": [], "downscales": false}
    ]})";
  }
  const auto topo = load_topology(path);
  REQUIRE(topo.size() == 2);
  CHECK_FALSE(topo.layers[0].kernel.has_value());
  CHECK(topo.layers[1].kind == LayerKind::detection);
}

TEST_CASE("topology validation rejects broken structures") {
  auto t = yolo();
  t.layers[5].links = {7};  // forward link
  t.layers[5].kind = LayerKind::route;
  CHECK_THROWS_AS(t.validate(), InputError);

  t = yolo();
  t.layers[4].links = {3};  // residual with one link
  CHECK_THROWS_AS(t.validate(), InputError);

  t = yolo();
  t.layers[10].index = 50;  // gap
  CHECK_THROWS_AS(t.validate(), InputError);
}

TEST_CASE("region_mean of a constant curve is the constant") {
  const std::vector<double> curve(107, 0.5);
  CHECK(region_mean(curve, yolo(), RegionSelector::all) == Catch::Approx(0.5));
  CHECK(region_mean(curve, yolo(), RegionSelector::backbone) == Catch::Approx(0.5));
  CHECK(region_mean(curve, yolo(), RegionSelector::head) == Catch::Approx(0.5));
}

TEST_CASE("region_mean arithmetic on a backbone/head step curve") {
  std::vector<double> curve(107, 0.0);
  for (int i = 0; i <= 74; ++i) curve[static_cast<std::size_t>(i)] = 1.0;
  CHECK(region_mean(curve, yolo(), RegionSelector::backbone) == Catch::Approx(1.0));
  CHECK(region_mean(curve, yolo(), RegionSelector::head) == Catch::Approx(0.0));
  CHECK(region_mean(curve, yolo(), RegionSelector::all) ==
        Catch::Approx(75.0 / 107.0).margin(1e-15));
}

TEST_CASE("region means recombine: all = (75 backbone + 32 head) / 107") {
  SplitMix64 rng(5);
  std::vector<double> curve(107);
  for (auto& v : curve) v = rng.next_unit();
  const double all = region_mean(curve, yolo(), RegionSelector::all);
  const double backbone = region_mean(curve, yolo(), RegionSelector::backbone);
  const double head = region_mean(curve, yolo(), RegionSelector::head);
  CHECK(all == Catch::Approx((75.0 * backbone + 32.0 * head) / 107.0).margin(1e-12));

  // And against a plain loop.
  double sum = 0.0;
  for (double v : curve) sum += v;
  CHECK(all == Catch::Approx(sum / 107.0).margin(1e-12));
}

TEST_CASE("region_mean rejects a curve of the wrong length") {
  const std::vector<double> curve(106, 0.5);
  CHECK_THROWS_AS(region_mean(curve, yolo(), RegionSelector::all), LengthMismatch);
}

TEST_CASE("annotate flags a single interior maximum") {
  std::vector<double> curve(107, 0.2);
  curve[4] = 0.9;  // layer 4 is residual
  const auto ann = annotate(curve, yolo());
  CHECK(ann.peaks == std::vector<int>{4});
  CHECK(ann.residual_peaks == std::vector<int>{4});
  CHECK(ann.rows[4].peak);
  CHECK(ann.rows[4].kind == LayerKind::residual);
}

TEST_CASE("a monotone curve has no interior peaks") {
  std::vector<double> curve(107);
  for (std::size_t i = 0; i < curve.size(); ++i)
    curve[i] = static_cast<double>(i) / 106.0;
  CHECK(annotate(curve, yolo()).peaks.empty());
}

TEST_CASE("peaks planted at all residual indices are recovered exactly") {
  const auto residuals = yolo().indices_of(LayerKind::residual);
  std::vector<double> curve(107, 0.1);
  for (int r : residuals) curve[static_cast<std::size_t>(r)] = 0.8;
  const auto ann = annotate(curve, yolo());
  CHECK(ann.peaks == residuals);
  CHECK(ann.residual_peaks == residuals);
}
