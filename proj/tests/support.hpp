#ifndef REPSIM_TESTS_SUPPORT_HPP
#define REPSIM_TESTS_SUPPORT_HPP

// Shared helpers for the test suites: seeded data generation (through the
// library's own deterministic PRNG) and small filesystem utilities. The
// independent oracles live in oracles.hpp.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repsim/fixtures.hpp"
#include "repsim/tensor.hpp"

namespace testsupport {

inline repsim::FeatureMatrix random_matrix(std::uint64_t seed, Eigen::Index n,
                                           Eigen::Index p) {
  repsim::GaussianStream g(seed);
  repsim::FeatureMatrix m;
  m.values.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m.values(i, j) = g.next();
  return m;
}

inline Eigen::MatrixXd random_orthogonal(std::uint64_t seed, Eigen::Index p) {
  const auto a = random_matrix(seed, p, p);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.values);
  return qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
}

inline std::vector<std::vector<double>> to_rows(const repsim::FeatureMatrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          m.values(i, j);
  }
  return rows;
}

// Fresh directory under the system temp root; unique per call.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("repsim_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace testsupport

#endif  // REPSIM_TESTS_SUPPORT_HPP
