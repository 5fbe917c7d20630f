#ifndef REPSIM_CCA_HPP
#define REPSIM_CCA_HPP

// SVCCA and PWCCA comparators.
//
// Both start from the thin SVD of the column-centered data, Xc = U S V'.
// Because U has orthonormal columns, the canonical correlations between the
// retained subspaces are exactly the singular values of Ux' Uy:
//
//   svcca:  truncate each side to the smallest rank holding >= variance_kept
//           of the squared singular-value mass, then average the canonical
//           correlations.
//   pwcca:  keep the full (regularized) rank; weight each canonical
//           correlation by how much of the first argument's representation
//           projects onto that canonical direction, weights normalized to 1.
//
// Within-set directions whose singular value falls below 1e-10 of the
// largest are discarded on both sides; they carry no usable signal and make
// the whitening ill-posed.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "repsim/cka.hpp"
#include "repsim/errors.hpp"
#include "repsim/tensor.hpp"

namespace repsim {

inline constexpr double kSingularValueCutoff = 1e-10;
inline constexpr double kDefaultVarianceKept = 0.99;

/// Thin SVD of the centered data after the relative cutoff. `row_space`
/// (S V', r x p) is kept only when PWCCA weights will be needed.
struct SvdBasis {
  Eigen::MatrixXd u;          // n x r, orthonormal columns
  Eigen::VectorXd sv;         // r singular values, descending
  Eigen::MatrixXd row_space;  // r x p, equals S V' (empty unless requested)

  Eigen::Index rank() const { return sv.size(); }

  // Smallest rank whose squared singular values hold >= variance_kept of
  // the total squared mass.
  Eigen::Index rank_for_variance(double variance_kept) const {
    const double total = sv.squaredNorm();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      cum += sv[i] * sv[i];
      if (cum >= variance_kept * total) return i + 1;
    }
    return sv.size();
  }
};

inline SvdBasis svd_basis(const FeatureMatrix& x, bool keep_row_space) {
  const FeatureMatrix xc = x.centered ? x : center_columns(x);
  unsigned options = Eigen::ComputeThinU;
  if (keep_row_space) options |= Eigen::ComputeThinV;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(xc.values, options);

  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0)
    throw DegenerateInput(
        "no signal: input is constant across examples (zero after centering)");
  Eigen::Index r = 0;
  while (r < s.size() && s[r] >= kSingularValueCutoff * s[0]) ++r;

  SvdBasis basis;
  basis.u = svd.matrixU().leftCols(r);
  basis.sv = s.head(r);
  if (keep_row_space)
    basis.row_space = basis.sv.asDiagonal() * svd.matrixV().leftCols(r).transpose();
  return basis;
}

namespace detail {

// Singular values of Ux' Uy restricted to the first (kx, ky) directions.
inline Eigen::VectorXd canonical_correlations(const SvdBasis& x, Eigen::Index kx,
                                              const SvdBasis& y, Eigen::Index ky,
                                              Eigen::MatrixXd* x_rotation) {
  const Eigen::MatrixXd m =
      x.u.leftCols(kx).transpose() * y.u.leftCols(ky);
  unsigned options = x_rotation ? Eigen::ComputeThinU : 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, options);
  Eigen::VectorXd rho = svd.singularValues();
  for (Eigen::Index i = 0; i < rho.size(); ++i) rho[i] = clamp_unit(rho[i]);
  if (x_rotation) *x_rotation = svd.matrixU();
  return rho;
}

}  // namespace detail

inline SimilarityScore svcca_from_bases(const SvdBasis& x, const SvdBasis& y,
                                        double variance_kept,
                                        std::int64_t n_examples) {
  const auto kx = x.rank_for_variance(variance_kept);
  const auto ky = y.rank_for_variance(variance_kept);
  const Eigen::VectorXd rho =
      detail::canonical_correlations(x, kx, y, ky, nullptr);
  SimilarityScore s;
  s.metric = Metric::svcca;
  s.value = rho.mean();
  s.n_examples = n_examples;
  s.p_x = kx;
  s.p_y = ky;
  return s;
}

inline SimilarityScore pwcca_from_bases(const SvdBasis& x, const SvdBasis& y,
                                        std::int64_t n_examples) {
  if (x.row_space.size() == 0)
    throw InputError("pwcca needs a basis built with keep_row_space");
  Eigen::MatrixXd rotation;
  const Eigen::VectorXd rho =
      detail::canonical_correlations(x, x.rank(), y, y.rank(), &rotation);
  const auto m = rho.size();

  // Canonical variates for the first argument are H = Ux A. Projection of
  // X's features onto them: H' Xc = A' (S V'), one L1 row norm per variate.
  const Eigen::MatrixXd proj = rotation.leftCols(m).transpose() * x.row_space;
  Eigen::VectorXd alpha = proj.cwiseAbs().rowwise().sum();
  const double total = alpha.sum();
  if (!(total > 0.0))
    throw DegenerateInput("pwcca: projection weights vanished");
  alpha /= total;

  SimilarityScore s;
  s.metric = Metric::pwcca;
  s.value = detail::clamp_unit(alpha.dot(rho));
  s.n_examples = n_examples;
  s.p_x = x.rank();
  s.p_y = y.rank();
  return s;
}

namespace detail {

inline void check_pair(const FeatureMatrix& x, const FeatureMatrix& y) {
  if (x.rows() != y.rows())
    throw RowCountMismatch("row counts differ: " + std::to_string(x.rows()) +
                           " vs " + std::to_string(y.rows()));
  if (x.rows() < 2) throw TooFewRows("cca needs at least 2 examples");
}

}  // namespace detail

/// SVD-truncate both representations, then average the canonical
/// correlations between the truncated subspaces.
inline SimilarityScore svcca(const FeatureMatrix& x, const FeatureMatrix& y,
                             double variance_kept = kDefaultVarianceKept) {
  detail::check_pair(x, y);
  if (!(variance_kept > 0.0) || variance_kept > 1.0)
    throw InputError("variance_kept must be in (0,1]");
  return svcca_from_bases(svd_basis(x, false), svd_basis(y, false),
                          variance_kept, x.rows());
}

/// Projection-weighted CCA. Weights are computed against the first
/// argument, so pwcca(x,y) != pwcca(y,x) in general; report both orders
/// when that matters.
inline SimilarityScore pwcca(const FeatureMatrix& x, const FeatureMatrix& y) {
  detail::check_pair(x, y);
  return pwcca_from_bases(svd_basis(x, true), svd_basis(y, false), x.rows());
}

}  // namespace repsim

#endif  // REPSIM_CCA_HPP
