#ifndef REPSIM_STATS_HPP
#define REPSIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "repsim/errors.hpp"
#include "repsim/manifest.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

/// Summary of one layer's output distribution, over every value in the
/// tensor. std is the population standard deviation; the median of an even
/// count is the mean of the two central order statistics.
struct LayerStats {
  int layer_index = 0;
  double mean = 0.0;
  double median = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline LayerStats layer_stats(const ActivationTensor& t) {
  t.validate();
  LayerStats s;
  s.layer_index = t.layer_index;

  const auto count = t.values.size();
  double sum = 0.0;
  for (float v : t.values) sum += v;  // fixed order, reproducible
  s.mean = sum / static_cast<double>(count);

  double sq = 0.0;
  for (float v : t.values) {
    const double d = v - s.mean;
    sq += d * d;
  }
  s.std_dev = std::sqrt(sq / static_cast<double>(count));

  std::vector<float> sorted(t.values);
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const auto mid = count / 2;
  s.median = count % 2 ? sorted[mid]
                       : (static_cast<double>(sorted[mid - 1]) + sorted[mid]) / 2.0;
  return s;
}

/// How the across-layer summary row is formed. per_layer averages each
/// statistic over the layers (a mean of medians, a mean of minima, ...),
/// so wide layers do not dominate narrow ones; pooled treats every value of
/// every layer as one population.
enum class StatsAveraging { per_layer, pooled };

struct ModelStats {
  std::string model_id;
  std::vector<LayerStats> per_layer;
  LayerStats averaged;
};

inline ModelStats model_stats(const ActivationSet& set,
                              StatsAveraging averaging = StatsAveraging::per_layer) {
  if (set.layers.empty()) throw EmptySet("model has no layers");
  ModelStats m;
  m.model_id = set.model_id;
  for (const auto& t : set.layers) m.per_layer.push_back(layer_stats(t));

  if (averaging == StatsAveraging::pooled) {
    ActivationTensor pool;
    std::size_t total = 0;
    for (const auto& t : set.layers) total += t.values.size();
    pool.values.reserve(total);
    for (const auto& t : set.layers)
      pool.values.insert(pool.values.end(), t.values.begin(), t.values.end());
    pool.shape = {static_cast<std::int64_t>(pool.values.size()), 1};
    m.averaged = layer_stats(pool);
    m.averaged.layer_index = -1;
    return m;
  }

  LayerStats& avg = m.averaged;
  avg.layer_index = -1;
  for (const auto& s : m.per_layer) {
    avg.mean += s.mean;
    avg.median += s.median;
    avg.std_dev += s.std_dev;
    avg.min += s.min;
    avg.max += s.max;
  }
  const auto k = static_cast<double>(m.per_layer.size());
  avg.mean /= k;
  avg.median /= k;
  avg.std_dev /= k;
  avg.min /= k;
  avg.max /= k;
  return m;
}

/// CSV rows: model_id, layer_index (or ALL for the across-layer average),
/// mean, median, std, min, max at 9 significant digits.
inline void write_stats_csv(const ModelStats& m, std::ostream& out) {
  out << "model_id,layer_index,mean,median,std,min,max\n";
  char buf[128];
  auto row = [&](const std::string& layer, const LayerStats& s) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", s.mean,
                  s.median, s.std_dev, s.min, s.max);
    out << m.model_id << ',' << layer << ',' << buf;
  };
  for (const auto& s : m.per_layer) row(std::to_string(s.layer_index), s);
  row("ALL", m.averaged);
}

}  // namespace repsim

#endif  // REPSIM_STATS_HPP
