#ifndef REPSIM_PIPELINE_HPP
#define REPSIM_PIPELINE_HPP

// Batch orchestration: turn two activation sets into a per-layer curve and
// a full layer-vs-layer matrix under one metric.
//
// Per-layer state is prepared once (centered Grams for CKA, SVD bases for
// the CCA metrics) and every pair score is then computed by one shared
// function of that state. The curve and the matrix diagonal therefore run
// the identical code on identical inputs and agree bit for bit, which the
// report checks. For CKA this keeps the whole matrix at O(L n^2) memory no
// matter how wide the layers are.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "repsim/cca.hpp"
#include "repsim/cka.hpp"
#include "repsim/errors.hpp"
#include "repsim/fixtures.hpp"
#include "repsim/manifest.hpp"
#include "repsim/render.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

struct MetricOptions {
  Metric metric = Metric::linear_cka;
  double variance_kept = kDefaultVarianceKept;  // svcca only
  Eigen::Index gram_block = 4096;
};

/// Per-layer precomputation for one activation set under one metric.
struct LayerCache {
  std::int64_t features = 0;
  // linear_cka: double-centered Gram and its Frobenius norm.
  GramMatrix gram;
  double gram_norm = 0.0;
  // svcca/pwcca: SVD basis of the centered features.
  SvdBasis basis;
};

inline int effective_threads() {
  if (const char* env = std::getenv("REPSIM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = std::min<int>(effective_threads(),
                                    static_cast<int>(std::max<std::size_t>(count, 1)));
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Prepares per-layer state; throws DegenerateInput naming every no-signal
/// layer rather than the first one found.
inline std::vector<LayerCache> prepare_layers(const ActivationSet& set,
                                              const MetricOptions& opts) {
  std::vector<LayerCache> caches(set.layers.size());
  std::vector<int> degenerate(set.layers.size(), -1);
  detail::parallel_for(set.layers.size(), [&](std::size_t i) {
    const FeatureMatrix features = flatten(set.layers[i]);
    LayerCache& cache = caches[i];
    cache.features = features.cols();
    try {
      if (opts.metric == Metric::linear_cka) {
        cache.gram = double_center(gram_linear(features, opts.gram_block));
        cache.gram_norm = cache.gram.values.norm();
        if (cache.gram_norm <= 0.0)
          throw DegenerateInput("no signal");
      } else {
        cache.basis =
            svd_basis(features, /*keep_row_space=*/opts.metric == Metric::pwcca);
      }
    } catch (const DegenerateInput&) {
      degenerate[i] = set.layers[i].layer_index;
    }
  });
  std::string bad;
  for (int idx : degenerate)
    if (idx >= 0) bad += (bad.empty() ? "" : ", ") + std::to_string(idx);
  if (!bad.empty())
    throw DegenerateInput("no-signal layer(s) with constant activations: " + bad);
  return caches;
}

/// One pair score from prepared state. This is the single code path behind
/// curves and matrices.
inline double pair_score(const LayerCache& a, const LayerCache& b,
                         const MetricOptions& opts) {
  switch (opts.metric) {
    case Metric::linear_cka:
      return detail::cka_from_centered(a.gram.values, a.gram_norm,
                                       b.gram.values, b.gram_norm);
    case Metric::svcca:
      return svcca_from_bases(a.basis, b.basis, opts.variance_kept,
                              a.basis.u.rows())
          .value;
    case Metric::pwcca:
      return pwcca_from_bases(a.basis, b.basis, a.basis.u.rows()).value;
  }
  throw InputError("unknown metric");
}

inline std::vector<double> compute_curve(const std::vector<LayerCache>& a,
                                         const std::vector<LayerCache>& b,
                                         const MetricOptions& opts) {
  if (a.size() != b.size())
    throw LengthMismatch("models have different layer counts: " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  std::vector<double> curve(a.size());
  detail::parallel_for(a.size(),
                       [&](std::size_t i) { curve[i] = pair_score(a[i], b[i], opts); });
  return curve;
}

inline SimilarityMatrix compute_matrix(const std::vector<LayerCache>& a,
                                       const std::vector<LayerCache>& b,
                                       const MetricOptions& opts,
                                       const std::string& model_a,
                                       const std::string& model_b) {
  SimilarityMatrix m;
  m.model_a = model_a;
  m.model_b = model_b;
  m.metric = metric_name(opts.metric);
  m.values.resize(static_cast<Eigen::Index>(a.size()),
                  static_cast<Eigen::Index>(b.size()));
  detail::parallel_for(a.size() * b.size(), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k / b.size());
    const auto j = static_cast<Eigen::Index>(k % b.size());
    m.values(i, j) = pair_score(a[static_cast<std::size_t>(i)],
                                b[static_cast<std::size_t>(j)], opts);
  });
  return m;
}

/// Deterministically selects `sample_count` examples using the run seed:
/// a partial Fisher-Yates over the row indices, selection then applied in
/// ascending row order so both models keep identical example pairing.
inline std::vector<std::int64_t> subsample_indices(std::int64_t n,
                                                   std::int64_t sample_count,
                                                   std::uint64_t seed) {
  if (sample_count >= n) {
    std::vector<std::int64_t> all(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  SplitMix64 rng(seed);
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const auto j = i + static_cast<std::int64_t>(
                           rng.next() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(sample_count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline ActivationSet subsample_rows(const ActivationSet& set,
                                    const std::vector<std::int64_t>& rows) {
  ActivationSet out;
  out.model_id = set.model_id;
  for (const auto& t : set.layers) {
    ActivationTensor s;
    s.model_id = t.model_id;
    s.layer_index = t.layer_index;
    s.shape = t.shape;
    s.shape[0] = static_cast<std::int64_t>(rows.size());
    const auto stride = static_cast<std::size_t>(t.features());
    s.values.reserve(rows.size() * stride);
    for (auto r : rows) {
      const auto* begin = t.values.data() + static_cast<std::size_t>(r) * stride;
      s.values.insert(s.values.end(), begin, begin + stride);
    }
    out.layers.push_back(std::move(s));
  }
  return out;
}

}  // namespace repsim

#endif  // REPSIM_PIPELINE_HPP
