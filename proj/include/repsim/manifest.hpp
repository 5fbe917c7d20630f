#ifndef REPSIM_MANIFEST_HPP
#define REPSIM_MANIFEST_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/errors.hpp"
#include "repsim/npy.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

struct ManifestEntry {
  int layer_index = 0;
  std::string path;  // relative to the manifest file
  std::vector<std::int64_t> shape;
};

/// Index of one model's activation dump: which layer lives in which file,
/// plus the experiment identifiers (seed, input size) the dump was made with.
struct ActivationManifest {
  std::string model_id;
  std::int64_t seed = 0;
  std::array<int, 2> input_size = {0, 0};  // (w,h) pixels
  std::vector<ManifestEntry> entries;
};

/// A model's full set of per-layer tensors, ordered by layer index.
struct ActivationSet {
  std::string model_id;
  std::vector<ActivationTensor> layers;

  std::size_t size() const { return layers.size(); }
  std::int64_t examples() const {
    return layers.empty() ? 0 : layers.front().examples();
  }
};

inline ActivationManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + path.string() + ": " + e.what());
  }
  try {
    ActivationManifest m;
    m.model_id = j.at("model_id").get<std::string>();
    m.seed = j.at("seed").get<std::int64_t>();
    m.input_size = {j.at("input_size").at(0).get<int>(),
                    j.at("input_size").at(1).get<int>()};
    for (const auto& e : j.at("layers")) {
      ManifestEntry entry;
      entry.layer_index = e.at("index").get<int>();
      entry.path = e.at("path").get<std::string>();
      entry.shape = e.at("shape").get<std::vector<std::int64_t>>();
      m.entries.push_back(std::move(entry));
    }
    for (std::size_t i = 1; i < m.entries.size(); ++i)
      if (m.entries[i].layer_index <= m.entries[i - 1].layer_index)
        throw InputError("manifest " + path.string() +
                         ": layer indices must be unique and strictly increasing");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest " + path.string() + ": " + e.what());
  }
}

inline void save_manifest(const ActivationManifest& m,
                          const std::filesystem::path& path) {
  nlohmann::json j;
  j["model_id"] = m.model_id;
  j["seed"] = m.seed;
  j["input_size"] = {m.input_size[0], m.input_size[1]};
  auto layers = nlohmann::json::array();
  for (const auto& e : m.entries)
    layers.push_back({{"index", e.layer_index}, {"path", e.path}, {"shape", e.shape}});
  j["layers"] = std::move(layers);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

/// Loads every tensor a manifest references. Validates that each file's
/// header shape matches the manifest and that all layers share the same
/// example count n (CKA pairs rows across layers, so a ragged batch is
/// unusable).
inline ActivationSet load_set(const std::filesystem::path& manifest_path) {
  const ActivationManifest m = load_manifest(manifest_path);
  const auto base = manifest_path.parent_path();

  ActivationSet set;
  set.model_id = m.model_id;
  for (const auto& e : m.entries) {
    const auto file = base / e.path;
    if (!std::filesystem::exists(file))
      throw MissingFile("manifest references missing file " + file.string());
    ActivationTensor t = npy::load_tensor(file);
    if (t.shape != e.shape)
      throw ShapeMismatch("layer " + std::to_string(e.layer_index) + ": file " +
                          file.string() + " shape disagrees with manifest");
    t.model_id = m.model_id;
    t.layer_index = e.layer_index;
    set.layers.push_back(std::move(t));
  }
  for (const auto& t : set.layers)
    if (t.examples() != set.examples())
      throw InconsistentBatch(
          "layer " + std::to_string(t.layer_index) + " has n=" +
          std::to_string(t.examples()) + " but layer " +
          std::to_string(set.layers.front().layer_index) + " has n=" +
          std::to_string(set.examples()));
  return set;
}

}  // namespace repsim

#endif  // REPSIM_MANIFEST_HPP
