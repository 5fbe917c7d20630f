#ifndef REPSIM_TENSOR_HPP
#define REPSIM_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "repsim/errors.hpp"

namespace repsim {

/// One layer's outputs for a batch of inputs, as dumped by an external
/// model-hook script. Convolutional layers dump (n,h,w,c); fully-connected
/// layers dump (n,d). Values stay in the 32-bit storage precision so a
/// save/load round trip is bit-exact; all analysis promotes to double.
struct ActivationTensor {
  std::string model_id;
  int layer_index = 0;
  std::vector<std::int64_t> shape;  // (n,h,w,c) or (n,d)
  std::vector<float> values;        // row-major, length = product(shape)

  std::int64_t examples() const { return shape.empty() ? 0 : shape.front(); }

  std::int64_t features() const {
    std::int64_t p = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) p *= shape[i];
    return shape.empty() ? 0 : p;
  }

  bool is_flat() const { return shape.size() == 2; }

  // Checks the structural invariants: rank 2 or 4, positive dims, value
  // count matching the shape product, and no NaN/Inf anywhere.
  void validate() const {
    if (shape.size() != 2 && shape.size() != 4)
      throw ShapeMismatch("tensor rank must be 2 or 4, got " +
                          std::to_string(shape.size()));
    std::int64_t prod = 1;
    for (auto d : shape) {
      if (d <= 0) throw ShapeMismatch("non-positive dimension in tensor shape");
      prod *= d;
    }
    if (prod != static_cast<std::int64_t>(values.size()))
      throw ShapeMismatch("value count " + std::to_string(values.size()) +
                          " does not match shape product " +
                          std::to_string(prod));
    for (float v : values)
      if (!std::isfinite(v))
        throw NonFinite("tensor contains NaN or Inf values");
  }
};

/// Dense examples-by-features matrix in double precision. Rows are examples,
/// columns are features; `centered` records that every column mean is zero.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  bool centered = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Treats a (n,h,w,c) output tensor as n vectors of length h*w*c, in the
/// row-major (h, then w, then c) order the tensor was stored in. A 2-D
/// tensor is already flat and passes through unchanged.
inline FeatureMatrix flatten(const ActivationTensor& t) {
  t.validate();
  const auto n = t.examples();
  const auto p = t.features();
  FeatureMatrix m;
  m.values = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic,
                                            Eigen::Dynamic, Eigen::RowMajor>>(
                 t.values.data(), n, p)
                 .cast<double>();
  m.centered = false;
  return m;
}

}  // namespace repsim

#endif  // REPSIM_TENSOR_HPP
