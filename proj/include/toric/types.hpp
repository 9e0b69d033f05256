#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace toric {

/// Largest polytope dimension supported by the fixed-capacity dense types.
inline constexpr int kMaxDim = 4;

// Dynamic-size vectors and matrices with inline storage: no heap traffic in
// the per-point evaluation loops.
template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;

/// Dense order-3 tensor over ℝⁿ, n ≤ kMaxDim, stored with a fixed stride.
template <typename Scalar>
struct Tensor3 {
  std::array<Scalar, kMaxDim * kMaxDim * kMaxDim> data{};

  static constexpr std::size_t index(int i, int j, int k) {
    return (static_cast<std::size_t>(i) * kMaxDim + j) * kMaxDim + k;
  }
  Scalar& operator()(int i, int j, int k) { return data[index(i, j, k)]; }
  const Scalar& operator()(int i, int j, int k) const { return data[index(i, j, k)]; }
};

/// Dense order-4 tensor over ℝⁿ, n ≤ kMaxDim.
template <typename Scalar>
struct Tensor4 {
  std::array<Scalar, kMaxDim * kMaxDim * kMaxDim * kMaxDim> data{};

  static constexpr std::size_t index(int i, int j, int k, int l) {
    return ((static_cast<std::size_t>(i) * kMaxDim + j) * kMaxDim + k) * kMaxDim + l;
  }
  Scalar& operator()(int i, int j, int k, int l) { return data[index(i, j, k, l)]; }
  const Scalar& operator()(int i, int j, int k, int l) const { return data[index(i, j, k, l)]; }
};

/// Malformed input (polytope files, checkpoints, configs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or argument outside the region where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toric
