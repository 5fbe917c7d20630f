#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repsim/fixtures.hpp"
#include "repsim/stats.hpp"
#include "support.hpp"

using namespace repsim;

TEST_CASE("constant tensor statistics") {
  ActivationTensor t;
  t.shape = {2, 1, 1, 3};
  t.values.assign(6, 0.5f);
  const auto s = layer_stats(t);
  CHECK(s.mean == 0.5);
  CHECK(s.median == 0.5);
  CHECK(s.std_dev == 0.0);
  CHECK(s.min == 0.5);
  CHECK(s.max == 0.5);
}

TEST_CASE("four-value arithmetic case") {
  ActivationTensor t;
  t.shape = {4, 1};
  t.values = {1, 2, 3, 4};
  const auto s = layer_stats(t);
  CHECK(s.mean == 2.5);
  CHECK(s.median == 2.5);  // mean of the two central order statistics
  CHECK(s.std_dev == Catch::Approx(std::sqrt(1.25)).margin(1e-15));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
}

TEST_CASE("odd-count median is the central order statistic") {
  ActivationTensor t;
  t.shape = {5, 1};
  t.values = {5, 1, 3, 2, 4};
  CHECK(layer_stats(t).median == 3.0);
}

TEST_CASE("large fixture matches the explicit-loop oracle") {
  GeneratorSpec spec;
  spec.seed = 99;
  spec.shapes = uniform_shapes(1, 200, 8, 8, 16);
  auto t = gaussian_tensor(spec, 0);
  t.values[0] = 100.0f;  // make min/max/median less symmetric
  const auto s = layer_stats(t);

  double sum = 0.0;
  for (float v : t.values) sum += v;
  const double mean = sum / double(t.values.size());
  double sq = 0.0;
  double mn = t.values[0], mx = t.values[0];
  for (float v : t.values) {
    sq += (v - mean) * (v - mean);
    mn = std::min<double>(mn, v);
    mx = std::max<double>(mx, v);
  }
  std::vector<float> sorted(t.values);
  std::sort(sorted.begin(), sorted.end());
  const double median =
      (double(sorted[sorted.size() / 2 - 1]) + sorted[sorted.size() / 2]) / 2.0;

  CHECK(s.mean == Catch::Approx(mean).margin(1e-9));
  CHECK(s.std_dev == Catch::Approx(std::sqrt(sq / double(t.values.size()))).margin(1e-9));
  CHECK(s.median == Catch::Approx(median).margin(1e-9));
  CHECK(s.min == mn);
  CHECK(s.max == mx);
}

TEST_CASE("scaling by a positive factor scales every statistic") {
  GeneratorSpec spec;
  spec.seed = 7;
  spec.shapes = uniform_shapes(1, 16, 2, 2, 4);
  const auto t = gaussian_tensor(spec, 0);
  auto scaled = t;
  for (auto& v : scaled.values) v *= 4.0f;  // exact in binary float
  const auto a = layer_stats(t);
  const auto b = layer_stats(scaled);
  CHECK(b.mean == Catch::Approx(4.0 * a.mean).margin(1e-9));
  CHECK(b.median == Catch::Approx(4.0 * a.median).margin(1e-9));
  CHECK(b.std_dev == Catch::Approx(4.0 * a.std_dev).margin(1e-9));
  CHECK(b.min == Catch::Approx(4.0 * a.min).margin(1e-9));
  CHECK(b.max == Catch::Approx(4.0 * a.max).margin(1e-9));
}

TEST_CASE("shuffling values leaves order statistics and moments unchanged") {
  GeneratorSpec spec;
  spec.seed = 8;
  spec.shapes = uniform_shapes(1, 10, 2, 2, 4);
  const auto t = gaussian_tensor(spec, 0);
  auto shuffled = t;
  SplitMix64 rng(1);
  for (std::size_t i = shuffled.values.size(); i > 1; --i)
    std::swap(shuffled.values[i - 1],
              shuffled.values[rng.next() % i]);
  const auto a = layer_stats(t);
  const auto b = layer_stats(shuffled);
  CHECK(b.median == a.median);
  CHECK(b.min == a.min);
  CHECK(b.max == a.max);
  CHECK(b.mean == Catch::Approx(a.mean).margin(1e-12));
  CHECK(b.std_dev == Catch::Approx(a.std_dev).margin(1e-12));
}

TEST_CASE("model_stats averages each statistic independently") {
  ActivationSet set;
  set.model_id = "m";
  ActivationTensor t0, t1;
  t0.layer_index = 0;
  t0.shape = {2, 1};
  t0.values = {0.0f, 0.0f};
  t1.layer_index = 1;
  t1.shape = {2, 1};
  t1.values = {1.0f, 1.0f};
  set.layers = {t0, t1};
  const auto m = model_stats(set);
  REQUIRE(m.per_layer.size() == 2);
  CHECK(m.averaged.mean == 0.5);
  CHECK(m.averaged.median == 0.5);
  CHECK(m.averaged.min == 0.5);  // mean of the per-layer minima
  CHECK(m.averaged.max == 0.5);
  CHECK(m.averaged.std_dev == 0.0);
}

TEST_CASE("pooled averaging treats all values as one population") {
  // Two constant layers at 0 and 1: per-layer averaging sees two zero
  // spreads, pooling sees a bimodal population.
  ActivationSet set;
  set.model_id = "m";
  ActivationTensor t0, t1;
  t0.layer_index = 0;
  t0.shape = {2, 1};
  t0.values = {0.0f, 0.0f};
  t1.layer_index = 1;
  t1.shape = {2, 1};
  t1.values = {1.0f, 1.0f};
  set.layers = {t0, t1};

  const auto per_layer = model_stats(set, StatsAveraging::per_layer);
  const auto pooled = model_stats(set, StatsAveraging::pooled);
  CHECK(per_layer.averaged.std_dev == 0.0);
  CHECK(pooled.averaged.std_dev == 0.5);
  CHECK(pooled.averaged.min == 0.0);  // true minimum, not a mean of minima
  CHECK(pooled.averaged.max == 1.0);
  CHECK(pooled.averaged.mean == 0.5);
  CHECK(pooled.averaged.median == 0.5);
}

TEST_CASE("single-layer model averages to that layer") {
  ActivationSet set;
  set.model_id = "m";
  ActivationTensor t;
  t.shape = {4, 1};
  t.values = {1, 2, 3, 4};
  set.layers = {t};
  const auto m = model_stats(set);
  CHECK(m.averaged.mean == m.per_layer[0].mean);
  CHECK(m.averaged.median == m.per_layer[0].median);
  CHECK(m.averaged.std_dev == m.per_layer[0].std_dev);
}

TEST_CASE("107-layer fixture averaged mean equals the loop oracle") {
  GeneratorSpec spec;
  spec.seed = 4;
  spec.shapes = uniform_shapes(107, 8, 2, 2, 2);
  ActivationSet set;
  set.model_id = "m";
  for (int i = 0; i < 107; ++i) set.layers.push_back(gaussian_tensor(spec, i));
  const auto m = model_stats(set);

  double mean_sum = 0.0, median_sum = 0.0;
  for (const auto& t : set.layers) {
    double s = 0.0;
    for (float v : t.values) s += v;
    mean_sum += s / double(t.values.size());
    std::vector<float> sorted(t.values);
    std::sort(sorted.begin(), sorted.end());
    median_sum += (double(sorted[sorted.size() / 2 - 1]) + sorted[sorted.size() / 2]) / 2.0;
  }
  CHECK(m.averaged.mean == Catch::Approx(mean_sum / 107.0).margin(1e-9));
  CHECK(m.averaged.median == Catch::Approx(median_sum / 107.0).margin(1e-9));
}

TEST_CASE("empty set raises") {
  ActivationSet set;
  CHECK_THROWS_AS(model_stats(set), EmptySet);
}

TEST_CASE("csv output shape and ALL row") {
  ActivationSet set;
  set.model_id = "demo";
  ActivationTensor t;
  t.layer_index = 3;
  t.shape = {4, 1};
  t.values = {1, 2, 3, 4};
  set.layers = {t};
  std::ostringstream out;
  write_stats_csv(model_stats(set), out);
  const std::string csv = out.str();
  CHECK(csv.find("model_id,layer_index,mean,median,std,min,max\n") == 0);
  CHECK(csv.find("demo,3,2.5,2.5,") != std::string::npos);
  CHECK(csv.find("demo,ALL,2.5,") != std::string::npos);
}
