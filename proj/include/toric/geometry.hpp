#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toric/derivatives.hpp"
#include "toric/potential.hpp"
#include "toric/types.hpp"

namespace toric {

/// Pointwise curvature data of the Hessian metric u_ij.
template <typename Scalar>
struct CurvatureT {
  VecT<Scalar> x;
  MatT<Scalar> hessian;   // u_ij
  MatT<Scalar> inverse;   // u^ij
  Tensor4<Scalar> F;      // F^{ab}_{kl} = -d_k d_l u^{ab}, stored F(a, b, k, l)
  Scalar fnorm{};         // |F|
  Scalar A{};             // scalar curvature
  Scalar detJ{};          // det u_ij
};

using CurvatureReport = CurvatureT<double>;

/// First x-derivatives of u^{ab}: dG[k](a, b) = -u^{ai} u_{ijk} u^{jb}.
template <typename Scalar>
std::array<MatT<Scalar>, kMaxDim> inverse_hessian_gradient(const MatT<Scalar>& G, const Tensor3<Scalar>& T,
                                                           int n) {
  std::array<MatT<Scalar>, kMaxDim> dG;
  for (int k = 0; k < n; ++k) {
    MatT<Scalar> Tk(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Tk(i, j) = T(i, j, k);
    dG[static_cast<std::size_t>(k)] = -(G * Tk * G);
  }
  return dG;
}

/// Curvature from a derivative bundle of order >= 4, by the chain rule
///   d_l d_k u^{ab} = -(d_l u^{ai}) u_{ijk} u^{jb} - u^{ai} u_{ijkl} u^{jb} - u^{ai} u_{ijk} (d_l u^{jb}).
/// |F|^2 = F^{ij}_{kl} F^{ab}_{cd} u_{ia} u_{jb} u^{kc} u^{ld}.
/// Throws DomainError if the Hessian is not positive definite.
template <typename Scalar>
CurvatureT<Scalar> curvature_from_bundle(const DerivativeBundle<Scalar>& d) {
  using std::sqrt;
  const int n = d.dim;
  if (d.order < 4) throw DomainError("curvature needs derivatives up to order 4");
  CurvatureT<Scalar> c;
  c.hessian = d.hessian;
  Eigen::LLT<MatT<Scalar>> llt(d.hessian);
  if (llt.info() != Eigen::Success) throw DomainError("Hessian is not positive definite");
  c.inverse = llt.solve(MatT<Scalar>::Identity(n, n));
  Scalar det(1);
  for (int i = 0; i < n; ++i) det *= llt.matrixL()(i, i);
  c.detJ = det * det;

  const MatT<Scalar>& G = c.inverse;
  const auto dG = inverse_hessian_gradient(G, d.third, n);
  for (int k = 0; k < n; ++k) {
    MatT<Scalar> Tk(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Tk(i, j) = d.third(i, j, k);
    for (int l = 0; l < n; ++l) {
      MatT<Scalar> Qkl(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Qkl(i, j) = d.fourth(i, j, k, l);
      const auto& dGl = dG[static_cast<std::size_t>(l)];
      const MatT<Scalar> second = -(dGl * Tk * G) - G * Qkl * G - G * Tk * dGl;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) c.F(a, b, k, l) = -second(a, b);
    }
  }

  c.A = Scalar(0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) c.A += c.F(a, b, a, b);

  // Lower the upper pair with u_ij and raise the lower pair with u^ij.
  Tensor4<Scalar> low;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Scalar acc(0);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) acc += d.hessian(i, a) * d.hessian(j, b) * c.F(a, b, k, l);
          low(i, j, k, l) = acc;
        }
  Scalar sq(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Scalar acc(0);
          for (int c1 = 0; c1 < n; ++c1)
            for (int d1 = 0; d1 < n; ++d1) acc += G(k, c1) * G(l, d1) * c.F(i, j, c1, d1);
          sq += low(i, j, k, l) * acc;
        }
  c.fnorm = sq > Scalar(0) ? sqrt(sq) : Scalar(0);
  return c;
}

/// A through the cofactor form  A = -U^{ij} (1/det u)_{ij}, written with
/// L_k = u^{ij} u_{ijk} and L_kl = d_l L_k as A = -u^{ij} (L_i L_j - L_ij).
template <typename Scalar>
Scalar scalar_curvature_cofactor_from_bundle(const DerivativeBundle<Scalar>& d) {
  const int n = d.dim;
  Eigen::LLT<MatT<Scalar>> llt(d.hessian);
  if (llt.info() != Eigen::Success) throw DomainError("Hessian is not positive definite");
  const MatT<Scalar> G = llt.solve(MatT<Scalar>::Identity(n, n));
  VecT<Scalar> L = VecT<Scalar>::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(k) += G(i, j) * d.third(i, j, k);
  MatT<Scalar> LL = MatT<Scalar>::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      Scalar acc(0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Scalar gtg(0);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) gtg += G(i, a) * d.third(a, b, l) * G(b, j);
          acc += -gtg * d.third(i, j, k) + G(i, j) * d.fourth(i, j, k, l);
        }
      LL(k, l) = acc;
    }
  Scalar A(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A -= G(i, j) * (L(i) * L(j) - LL(i, j));
  return A;
}

/// Curvature of u at x (x in the margin region).
CurvatureReport curvature_at(const SymplecticPotential& u, const Vec& x);
double scalar_curvature_cofactor(const SymplecticPotential& u, const Vec& x);

/// Length of the polyline in the metric u_ij dx^i dx^j by adaptive
/// Gauss-Kronrod quadrature. All vertices must lie in the margin region.
double riemannian_length(const SymplecticPotential& u, const std::vector<Vec>& polyline, double rel_tol = 1e-8);

/// Length of the segment from interior point x to boundary point y of P,
/// where the integrand blows up like (distance)^(-1/2). Facet values along the
/// segment are interpolated from the endpoints so the singular ones are exact.
double riemannian_length_to_boundary(const SymplecticPotential& u, const Vec& x, const Vec& y,
                                     double rel_tol = 1e-8);

/// First boundary point hit by the ray x + t v (t > 0), with the hit facet.
struct RayHit {
  double t = 0.0;
  Vec point;
  int facet = -1;
};
RayHit ray_exit(const Polytope& P, const Vec& x, const Vec& v);

struct GeodesicPath {
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  std::vector<double> t;  // arc length
  Vec x0, v0;
  std::string reason;  // "time reached" or "hit margin boundary"
  double max_speed_drift = 0.0;
};

/// Geodesic of the Hessian metric from x0 with initial velocity v0 (rescaled
/// to unit speed), integrated to arc length t_max or the margin boundary.
/// Throws ConvergenceError on step-size underflow.
GeodesicPath geodesic_shoot(const SymplecticPotential& u, const Vec& x0, const Vec& v0, double t_max);

/// Upper estimate of the Riemannian distance from x to facet k (or to the
/// whole boundary when facet < 0): shortest of a fan of straight segments.
double dist_boundary_riemannian(const SymplecticPotential& u, const Vec& x, int facet = -1);

}  // namespace toric
