#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "repsim/cca.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace repsim;
using testsupport::random_matrix;

namespace {

FeatureMatrix permute_columns(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  const auto p = m.cols();
  for (Eigen::Index j = 0; j < p; ++j) out.values.col(j) = m.values.col(p - 1 - j);
  return out;
}

}  // namespace

TEST_CASE("svcca of a matrix with itself is 1") {
  const auto x = random_matrix(0, 20, 8);
  CHECK(svcca(x, x).value == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("svcca is invariant to column permutation") {
  const auto x = random_matrix(1, 20, 8);
  CHECK(svcca(x, permute_columns(x)).value == Catch::Approx(1.0).margin(1e-10));

  const auto y = random_matrix(2, 20, 5);
  const double base = svcca(x, y).value;
  CHECK(svcca(permute_columns(x), y).value == Catch::Approx(base).margin(1e-10));
  CHECK(svcca(x, permute_columns(y)).value == Catch::Approx(base).margin(1e-10));
}

TEST_CASE("svcca matches the composition oracle on seeded 20x8 fixtures") {
  for (std::uint64_t seed : {10ULL, 11ULL, 12ULL}) {
    const auto x = random_matrix(seed, 20, 8);
    const auto y = random_matrix(seed + 40, 20, 8);
    const double expected = oracles::svcca(x, y, 0.99);
    CHECK(svcca(x, y, 0.99).value == Catch::Approx(expected).margin(1e-6));
  }
}

TEST_CASE("svcca truncation reacts to variance_kept") {
  // Stretch one direction so a loose threshold keeps only it while a tight
  // one keeps the rest of the spectrum too.
  auto x = random_matrix(3, 30, 6);
  x.values.col(0) *= 10.0;  // roughly 95% of the squared mass
  const auto y = random_matrix(4, 30, 6);
  const auto tight = svcca(x, y, 0.99);
  const auto loose = svcca(x, y, 0.6);
  CHECK(loose.p_x == 1);
  CHECK(tight.p_x > loose.p_x);
}

TEST_CASE("svcca input validation") {
  const auto x = random_matrix(5, 10, 3);
  CHECK_THROWS_AS(svcca(x, random_matrix(5, 11, 3)), RowCountMismatch);
  CHECK_THROWS_AS(svcca(x, x, 0.0), InputError);
  CHECK_THROWS_AS(svcca(x, x, 1.5), InputError);
  FeatureMatrix zero;
  zero.values = Eigen::MatrixXd::Zero(10, 3);
  CHECK_THROWS_AS(svcca(zero, x), DegenerateInput);
}

TEST_CASE("pwcca of a matrix with itself is 1") {
  const auto x = random_matrix(6, 20, 8);
  CHECK(pwcca(x, x).value == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("pwcca on a rank-1 matrix against itself is 1 with one pair") {
  FeatureMatrix x;
  x.values = random_matrix(7, 12, 1).values * random_matrix(8, 1, 5).values;
  const auto s = pwcca(x, x);
  CHECK(s.value == Catch::Approx(1.0).margin(1e-10));
  CHECK(s.p_x == 1);
}

TEST_CASE("pwcca matches the composition oracle on seeded 20x8 fixtures") {
  for (std::uint64_t seed : {20ULL, 21ULL, 22ULL}) {
    const auto x = random_matrix(seed, 20, 8);
    const auto y = random_matrix(seed + 60, 20, 8);
    const double expected = oracles::pwcca(x, y);
    CHECK(pwcca(x, y).value == Catch::Approx(expected).margin(1e-6));
  }
}

TEST_CASE("pwcca is invariant to column permutation of either argument") {
  const auto x = random_matrix(9, 18, 6);
  const auto y = random_matrix(10, 18, 7);
  const double base = pwcca(x, y).value;
  CHECK(pwcca(permute_columns(x), y).value == Catch::Approx(base).margin(1e-10));
  CHECK(pwcca(x, permute_columns(y)).value == Catch::Approx(base).margin(1e-10));
}

TEST_CASE("pwcca records the argument order") {
  // Asymmetric by construction; the score carries the first argument's rank.
  auto x = random_matrix(11, 25, 4);
  auto y = random_matrix(12, 25, 9);
  const auto ab = pwcca(x, y);
  const auto ba = pwcca(y, x);
  CHECK(ab.p_x == 4);
  CHECK(ba.p_x == 9);
}

TEST_CASE("scores stay in the unit interval") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto x = random_matrix(seed, 14, 5);
    const auto y = random_matrix(seed + 80, 14, 6);
    const double sv = svcca(x, y).value;
    const double pw = pwcca(x, y).value;
    CHECK(sv >= 0.0);
    CHECK(sv <= 1.0);
    CHECK(pw >= 0.0);
    CHECK(pw <= 1.0);
  }
}
