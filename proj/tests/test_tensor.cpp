#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "repsim/fixtures.hpp"
#include "repsim/tensor.hpp"
#include "support.hpp"

using namespace repsim;

TEST_CASE("flatten definition case") {
  ActivationTensor t;
  t.shape = {2, 1, 1, 3};
  t.values = {1, 2, 3, 4, 5, 6};
  const auto m = flatten(t);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  CHECK(m.values(0, 0) == 1.0);
  CHECK(m.values(0, 2) == 3.0);
  CHECK(m.values(1, 0) == 4.0);
  CHECK(m.values(1, 2) == 6.0);
  CHECK_FALSE(m.centered);
}

TEST_CASE("flatten single example") {
  ActivationTensor t;
  t.shape = {1, 2, 2, 1};
  t.values = {10, 20, 30, 40};
  const auto m = flatten(t);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 4);
  for (int j = 0; j < 4; ++j) CHECK(m.values(0, j) == 10.0 * (j + 1));
}

TEST_CASE("flatten index arithmetic matches exhaustive oracle") {
  GeneratorSpec spec;
  spec.seed = 5;
  spec.shapes = uniform_shapes(1, 3, 2, 2, 4);
  const auto t = gaussian_tensor(spec, 0);
  const auto m = flatten(t);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 16);
  // Feature column of (h,w,c) is h*(w_dim*c_dim) + w*c_dim + c.
  for (int i = 0; i < 3; ++i)
    for (int h = 0; h < 2; ++h)
      for (int w = 0; w < 2; ++w)
        for (int c = 0; c < 4; ++c) {
          const auto tensor_value =
              t.values[static_cast<std::size_t>(((i * 2 + h) * 2 + w) * 4 + c)];
          CHECK(m.values(i, h * 8 + w * 4 + c) == double(tensor_value));
        }
}

TEST_CASE("flatten is a bijection on index sets for all small shapes") {
  // Exhaustive over dims <= 4 each: every (i,h,w,c) must land on a distinct
  // (row, col), and the value sum must be preserved.
  for (std::int64_t n = 1; n <= 4; ++n)
    for (std::int64_t h = 1; h <= 4; ++h)
      for (std::int64_t w = 1; w <= 4; ++w)
        for (std::int64_t c = 1; c <= 4; ++c) {
          ActivationTensor t;
          t.shape = {n, h, w, c};
          t.values.resize(static_cast<std::size_t>(n * h * w * c));
          std::iota(t.values.begin(), t.values.end(), 1.0f);
          const auto m = flatten(t);
          REQUIRE(m.rows() == n);
          REQUIRE(m.cols() == h * w * c);
          std::vector<bool> hit(t.values.size(), false);
          for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t f = 0; f < h * w * c; ++f) {
              const auto v = static_cast<std::size_t>(m.values(i, f)) - 1;
              REQUIRE(v < hit.size());
              REQUIRE_FALSE(hit[v]);
              hit[v] = true;
            }
          const double tensor_sum =
              std::accumulate(t.values.begin(), t.values.end(), 0.0);
          CHECK(m.values.sum() == Catch::Approx(tensor_sum));
        }
}

TEST_CASE("flatten passes 2-D tensors through unchanged") {
  ActivationTensor t;
  t.shape = {2, 3};
  t.values = {1, 2, 3, 4, 5, 6};
  const auto m = flatten(t);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  CHECK(m.values(1, 1) == 5.0);
}

TEST_CASE("validate rejects malformed tensors") {
  ActivationTensor t;
  t.shape = {2, 2, 2};  // rank 3
  t.values.resize(8);
  CHECK_THROWS_AS(t.validate(), ShapeMismatch);

  t.shape = {2, 2};
  t.values.resize(5);  // wrong count
  CHECK_THROWS_AS(t.validate(), ShapeMismatch);

  t.shape = {2, 0};
  t.values.clear();
  CHECK_THROWS_AS(t.validate(), ShapeMismatch);
}
