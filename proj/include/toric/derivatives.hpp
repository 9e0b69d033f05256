#pragma once

#include <cmath>

#include "toric/polytope.hpp"
#include "toric/types.hpp"

namespace toric {

/// Value and derivatives up to order four of a scalar function on ℝⁿ.
/// The third and fourth derivatives are stored as full symmetric tensors.
template <typename Scalar>
struct DerivativeBundle {
  int dim = 0;
  int order = 0;
  Scalar value{};
  VecT<Scalar> gradient;
  MatT<Scalar> hessian;
  Tensor3<Scalar> third;
  Tensor4<Scalar> fourth;

  DerivativeBundle() = default;
  DerivativeBundle(int n, int max_order) : dim(n), order(max_order) {
    gradient = VecT<Scalar>::Zero(n);
    hessian = MatT<Scalar>::Zero(n, n);
  }

  DerivativeBundle& operator+=(const DerivativeBundle& o) {
    value += o.value;
    gradient += o.gradient;
    hessian += o.hessian;
    for (std::size_t i = 0; i < third.data.size(); ++i) third.data[i] += o.third.data[i];
    for (std::size_t i = 0; i < fourth.data.size(); ++i) fourth.data[i] += o.fourth.data[i];
    return *this;
  }
};

using Derivatives = DerivativeBundle<double>;

/// Derivatives of u0 = 1/2 sum_k w_k l_k log l_k given the facet values l_k
/// at the point. Throws DomainError when some weighted l_k <= 0.
template <typename Scalar, typename LDerived>
DerivativeBundle<Scalar> guillemin_from_values(const Polytope& P, const Eigen::VectorXd& weights,
                                               const Eigen::MatrixBase<LDerived>& lvals, int order) {
  using std::log;
  const int n = P.dim();
  DerivativeBundle<Scalar> b(n, order);
  for (int k = 0; k < P.facet_count(); ++k) {
    const Scalar w = Scalar(weights(k));
    if (w == Scalar(0)) continue;
    const Scalar l = Scalar(lvals(k));
    if (!(l > Scalar(0))) throw DomainError("Guillemin potential evaluated on or outside the boundary");
    const auto nu = [&](int i) { return Scalar(P.normals()(k, i)); };
    const Scalar half_w = w / Scalar(2);
    const Scalar log_l = log(l);
    b.value += half_w * l * log_l;
    if (order < 1) continue;
    for (int i = 0; i < n; ++i) b.gradient(i) += half_w * nu(i) * (log_l + Scalar(1));
    if (order < 2) continue;
    const Scalar c2 = half_w / l;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b.hessian(i, j) += c2 * nu(i) * nu(j);
    if (order < 3) continue;
    const Scalar c3 = -half_w / (l * l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m) b.third(i, j, m) += c3 * nu(i) * nu(j) * nu(m);
    if (order < 4) continue;
    const Scalar c4 = w / (l * l * l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m)
          for (int q = 0; q < n; ++q) b.fourth(i, j, m, q) += c4 * nu(i) * nu(j) * nu(m) * nu(q);
  }
  return b;
}

/// Closed-form derivatives of u0 at an interior point. With all weights one
/// this is the Guillemin potential of P.
template <typename Scalar, typename Derived>
DerivativeBundle<Scalar> guillemin_derivatives(const Polytope& P, const Eigen::VectorXd& weights,
                                               const Eigen::MatrixBase<Derived>& x, int order) {
  return guillemin_from_values<Scalar>(P, weights, facet_values(P, x), order);
}

/// Unweighted Guillemin potential, u0 = 1/2 sum_k l_k log l_k.
template <typename Scalar = double, typename Derived>
DerivativeBundle<Scalar> guillemin_derivatives(const Polytope& P, const Eigen::MatrixBase<Derived>& x,
                                               int order) {
  return guillemin_derivatives<Scalar>(P, Eigen::VectorXd::Ones(P.facet_count()), x, order);
}

}  // namespace toric
