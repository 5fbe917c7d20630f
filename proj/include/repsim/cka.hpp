#ifndef REPSIM_CKA_HPP
#define REPSIM_CKA_HPP

// Linear centered kernel alignment and the supporting algebra.
//
// For column-centered Xc (n x p_x) and Yc (n x p_y) with rows = examples:
//
//     cka(X,Y) = ||Yc' Xc||_F^2 / (||Xc' Xc||_F ||Yc' Yc||_F)
//
// Two routes compute it. The feature path centers the columns explicitly and
// evaluates the norms from the centered data; the Gram path builds K = X X'
// from the raw data in column blocks (peak memory n^2 + n*block) and double
// centers the n x n Gram with H = I - 11'/n, using tr(Kc Lc) = ||Yc' Xc||_F^2.
// The Gram path is the production route for wide layers (p >> n); the two
// routes must agree to 1e-8.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "repsim/errors.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

enum class Metric { linear_cka, svcca, pwcca };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::linear_cka: return "linear_cka";
    case Metric::svcca: return "svcca";
    case Metric::pwcca: return "pwcca";
  }
  return "?";
}

inline Metric metric_from_name(const std::string& s) {
  if (s == "cka" || s == "linear_cka") return Metric::linear_cka;
  if (s == "svcca") return Metric::svcca;
  if (s == "pwcca") return Metric::pwcca;
  throw InputError("unknown metric '" + s + "' (expected cka, svcca or pwcca)");
}

struct SimilarityScore {
  double value = 0.0;
  Metric metric = Metric::linear_cka;
  std::int64_t n_examples = 0;
  std::int64_t p_x = 0;
  std::int64_t p_y = 0;
};

struct GramMatrix {
  Eigen::MatrixXd values;  // n x n, symmetric
  bool double_centered = false;

  Eigen::Index order() const { return values.rows(); }
};

enum class CkaPath { automatic, feature, gram };

/// Subtracts each column's mean. Idempotent; requires n >= 2 (a single row
/// centers to zero and destroys all signal).
inline FeatureMatrix center_columns(const FeatureMatrix& x) {
  if (x.rows() < 2)
    throw TooFewRows("column centering needs at least 2 rows, got " +
                     std::to_string(x.rows()));
  FeatureMatrix out;
  out.values = x.values.rowwise() - x.values.colwise().mean();
  out.centered = true;
  return out;
}

/// K[i][j] = <row_i, row_j>, accumulated over column blocks so that no
/// intermediate grows with p.
inline GramMatrix gram_linear(const FeatureMatrix& x,
                              Eigen::Index block_cols = 4096) {
  if (x.rows() == 0 || x.cols() == 0)
    throw InputError("gram_linear: empty matrix");
  if (block_cols < 1) block_cols = x.cols();
  GramMatrix k;
  k.values = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  for (Eigen::Index c0 = 0; c0 < x.cols(); c0 += block_cols) {
    const auto b = std::min(block_cols, x.cols() - c0);
    const auto block = x.values.middleCols(c0, b);
    k.values.noalias() += block * block.transpose();
  }
  k.double_centered = false;
  return k;
}

/// Kc = H K H with H = I - 11'/n; equals the Gram of the column-centered
/// data when K came from raw data.
inline GramMatrix double_center(const GramMatrix& k) {
  if (k.double_centered) return k;
  GramMatrix out;
  const auto& v = k.values;
  const Eigen::VectorXd row_means = v.rowwise().mean();
  const double total_mean = row_means.mean();
  out.values = v;
  out.values.colwise() -= row_means;
  out.values.rowwise() -= row_means.transpose();
  out.values.array() += total_mean;
  out.double_centered = true;
  return out;
}

namespace detail {

inline double clamp_unit(double v) {
  if (v < 0.0) return 0.0;
  if (v > 1.0) return 1.0;
  return v;
}

// tr(Kc Lc) / (||Kc||_F ||Lc||_F) for already-centered Grams with
// precomputed norms. Shared verbatim by every CKA entry point so that the
// same inputs always produce the same bits.
inline double cka_from_centered(const Eigen::MatrixXd& kc, double k_norm,
                                const Eigen::MatrixXd& lc, double l_norm) {
  if (k_norm <= 0.0 || l_norm <= 0.0)
    throw DegenerateInput(
        "no signal: input is constant across examples (zero after centering)");
  const double hsic = kc.cwiseProduct(lc).sum();
  return clamp_unit(hsic / (k_norm * l_norm));
}

}  // namespace detail

inline SimilarityScore cka_from_grams(const GramMatrix& k, const GramMatrix& l) {
  if (k.order() != l.order())
    throw OrderMismatch("gram orders differ: " + std::to_string(k.order()) +
                        " vs " + std::to_string(l.order()));
  const GramMatrix kc = double_center(k);
  const GramMatrix lc = double_center(l);
  SimilarityScore s;
  s.metric = Metric::linear_cka;
  s.n_examples = k.order();
  s.p_x = s.p_y = -1;  // unknown at the Gram level
  s.value = detail::cka_from_centered(kc.values, kc.values.norm(), lc.values,
                                      lc.values.norm());
  return s;
}

/// Linear CKA between two representations of the same examples. Column
/// counts may differ. `path` selects the evaluation route; `automatic`
/// uses the feature path for narrow inputs and the Gram path once either
/// width exceeds n. Centering can be disabled for debugging only; the
/// metric is defined on centered data.
inline SimilarityScore linear_cka(const FeatureMatrix& x,
                                  const FeatureMatrix& y,
                                  CkaPath path = CkaPath::automatic,
                                  bool center = true) {
  if (x.rows() != y.rows())
    throw RowCountMismatch("row counts differ: " + std::to_string(x.rows()) +
                           " vs " + std::to_string(y.rows()));
  if (x.rows() < 2)
    throw TooFewRows("linear_cka needs at least 2 examples");

  const auto n = x.rows();
  if (path == CkaPath::automatic)
    path = (x.cols() > n || y.cols() > n) ? CkaPath::gram : CkaPath::feature;

  SimilarityScore s;
  s.metric = Metric::linear_cka;
  s.n_examples = n;
  s.p_x = x.cols();
  s.p_y = y.cols();

  if (path == CkaPath::gram) {
    // Raw Grams, centered on the n x n side.
    GramMatrix k = gram_linear(x);
    GramMatrix l = gram_linear(y);
    if (center) {
      k = double_center(k);
      l = double_center(l);
    }
    s.value = detail::cka_from_centered(k.values, k.values.norm(), l.values,
                                        l.values.norm());
    return s;
  }

  FeatureMatrix x_owned, y_owned;
  if (center && !x.centered) x_owned = center_columns(x);
  if (center && !y.centered) y_owned = center_columns(y);
  const Eigen::MatrixXd& xc = x_owned.values.size() ? x_owned.values : x.values;
  const Eigen::MatrixXd& yc = y_owned.values.size() ? y_owned.values : y.values;

  // Norms evaluated in feature space. The literal p x p products are only
  // materialized while they are small; past that the identity
  // ||A' B||_F^2 = tr((A A')(B B')) keeps everything n x n while still
  // working from the explicitly centered features.
  constexpr Eigen::Index kDirectLimit = 2048;
  double num, dx, dy;
  if (xc.cols() <= kDirectLimit && yc.cols() <= kDirectLimit) {
    num = (yc.transpose() * xc).squaredNorm();
    dx = (xc.transpose() * xc).norm();
    dy = (yc.transpose() * yc).norm();
  } else {
    const Eigen::MatrixXd kx = xc * xc.transpose();
    const Eigen::MatrixXd ky = yc * yc.transpose();
    num = kx.cwiseProduct(ky).sum();
    dx = kx.norm();
    dy = ky.norm();
  }
  if (dx <= 0.0 || dy <= 0.0)
    throw DegenerateInput(
        "no signal: input is constant across examples (zero after centering)");
  s.value = detail::clamp_unit(num / (dx * dy));
  return s;
}

/// Mean over rows of the Euclidean distance between paired rows. Not a
/// similarity index (not scale invariant), but occasionally informative.
inline double mean_distance(const FeatureMatrix& x, const FeatureMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ShapeMismatch("mean_distance requires identical shapes");
  if (x.rows() == 0) throw InputError("mean_distance: empty matrix");
  return (x.values - y.values).rowwise().norm().mean();
}

}  // namespace repsim

#endif  // REPSIM_CKA_HPP
