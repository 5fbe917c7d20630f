#ifndef REPSIM_FIXTURES_HPP
#define REPSIM_FIXTURES_HPP

// Deterministic synthetic activation generation. The whole pipeline has to
// be testable without a neural network, so tensors come from a PRNG that is
// bit-exact across platforms and languages: SplitMix64 driving Box-Muller.
// Platform library generators are deliberately not used anywhere here.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "repsim/errors.hpp"
#include "repsim/manifest.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

/// SplitMix64 (Steele, Lea, Flood 2014). state += golden gamma; the output
/// mix is a bijection of the state, so distinct seeds give distinct streams.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in (0,1]: top 53 bits, shifted into (0,1] so that
  // log(u) below is always finite.
  double next_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }
};

/// Standard normal stream: Box-Muller over pairs of (0,1] uniforms. The
/// first uniform of a pair is the radius, the second the angle.
struct GaussianStream {
  SplitMix64 rng;
  double spare = 0.0;
  bool have_spare = false;

  explicit GaussianStream(std::uint64_t seed) : rng(seed) {}

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
  }
};

enum class Scheme { independent, shared_prefix, planted_peaks };

struct LayerShape {
  std::int64_t n = 0, h = 0, w = 0, c = 0;

  std::int64_t count() const { return n * h * w * c; }
  std::vector<std::int64_t> dims() const { return {n, h, w, c}; }
};

/// Recipe for a deterministic pair of synthetic models. Layers listed as
/// shared are bit-identical between the two models; all other layers are
/// drawn independently, which pins their expected similarity at the
/// finite-n random baseline.
struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::vector<LayerShape> shapes;  // one per layer
  Scheme scheme = Scheme::independent;
  int shared_prefix = 0;             // used when scheme == shared_prefix
  std::vector<int> planted;          // used when scheme == planted_peaks
  std::string model_id_a = "fixture-a";
  std::string model_id_b = "fixture-b";
  std::array<int, 2> input_size = {32, 32};

  bool layer_shared(int layer_index) const {
    switch (scheme) {
      case Scheme::independent:
        return false;
      case Scheme::shared_prefix:
        return layer_index < shared_prefix;
      case Scheme::planted_peaks:
        for (int i : planted)
          if (i == layer_index) return true;
        return false;
    }
    return false;
  }

  void validate() const {
    if (shapes.empty()) throw InputError("generator spec has no layer shapes");
    for (const auto& s : shapes)
      if (s.n < 1 || s.h < 1 || s.w < 1 || s.c < 1)
        throw InputError("generator spec has a non-positive dimension");
    if (scheme == Scheme::shared_prefix &&
        (shared_prefix < 0 ||
         shared_prefix > static_cast<int>(shapes.size())))
      throw InputError("shared prefix length out of range");
    if (scheme == Scheme::planted_peaks)
      for (int i : planted)
        if (i < 0 || i >= static_cast<int>(shapes.size()))
          throw InputError("planted peak index out of range");
  }
};

inline std::vector<LayerShape> uniform_shapes(std::size_t layer_count,
                                              std::int64_t n, std::int64_t h,
                                              std::int64_t w, std::int64_t c) {
  return std::vector<LayerShape>(layer_count, LayerShape{n, h, w, c});
}

namespace detail {

// Stream seeds are derived from (seed XOR layer), never from a shared
// stream, so layers can be generated in any order or in parallel. Model B
// layers that are not shared get an extra salt to decorrelate them.
inline constexpr std::uint64_t kModelBSalt = 0xD1B54A32D192ED03ULL;

inline ActivationTensor draw_tensor(const LayerShape& shape, int layer_index,
                                    std::uint64_t stream_seed,
                                    const std::string& model_id) {
  ActivationTensor t;
  t.model_id = model_id;
  t.layer_index = layer_index;
  t.shape = shape.dims();
  t.values.resize(static_cast<std::size_t>(shape.count()));
  GaussianStream g(stream_seed);
  for (auto& v : t.values) v = static_cast<float>(g.next());
  return t;
}

}  // namespace detail

/// The model-A tensor for one layer; fully determined by (seed, layer_index).
inline ActivationTensor gaussian_tensor(const GeneratorSpec& spec,
                                        int layer_index) {
  spec.validate();
  const auto& shape = spec.shapes.at(static_cast<std::size_t>(layer_index));
  return detail::draw_tensor(shape, layer_index,
                             spec.seed ^ static_cast<std::uint64_t>(layer_index),
                             spec.model_id_a);
}

/// Both models. Shared layers reuse model A's stream seed and are therefore
/// bit-identical; independent layers salt the seed.
inline std::pair<ActivationSet, ActivationSet> gen_model_pair(
    const GeneratorSpec& spec) {
  spec.validate();
  ActivationSet a, b;
  a.model_id = spec.model_id_a;
  b.model_id = spec.model_id_b;
  for (int i = 0; i < static_cast<int>(spec.shapes.size()); ++i) {
    const std::uint64_t base = spec.seed ^ static_cast<std::uint64_t>(i);
    a.layers.push_back(
        detail::draw_tensor(spec.shapes[i], i, base, spec.model_id_a));
    const std::uint64_t b_seed =
        spec.layer_shared(i) ? base : base ^ detail::kModelBSalt;
    b.layers.push_back(
        detail::draw_tensor(spec.shapes[i], i, b_seed, spec.model_id_b));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace repsim

#endif  // REPSIM_FIXTURES_HPP
