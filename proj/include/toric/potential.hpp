#pragma once

#include <Eigen/Dense>

#include "toric/derivatives.hpp"
#include "toric/polytope.hpp"
#include "toric/spline.hpp"
#include "toric/types.hpp"

namespace toric {

/// Symplectic potential u = u0 + f + (a.x + b) on a polytope P.
///
/// u0 = 1/2 sum_k w_k l_k log l_k is evaluated in closed form; f is a spline
/// over the bounding box. The affine term is kept separately so that it never
/// goes through the spline (rescaling produces one exactly).
/// Weights default to one; all-zero weights give the "test mode" potentials
/// with no singular part.
class SymplecticPotential {
 public:
  SymplecticPotential() = default;
  SymplecticPotential(Polytope P, SmoothPart f, double margin);
  SymplecticPotential(Polytope P, SmoothPart f, double margin, Eigen::VectorXd weights);

  /// u0 with f = 0 on a grid of spacing h.
  static SymplecticPotential guillemin(const Polytope& P, double h, double margin);
  /// Test mode: no singular part, u = 1/2 |x|^2.
  static SymplecticPotential flat(const Polytope& P, double h, double margin);

  const Polytope& polytope() const { return P_; }
  const SmoothPart& smooth() const { return f_; }
  double margin() const { return margin_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Vec& affine_gradient() const { return affine_a_; }
  double affine_constant() const { return affine_b_; }
  int dim() const { return P_.dim(); }

  /// New smooth part, everything else unchanged.
  SymplecticPotential with_smooth(SmoothPart f) const;
  SymplecticPotential with_margin(double margin) const;
  /// u + a.x + b.
  SymplecticPotential plus_affine(const Vec& a, double b) const;
  /// u - u(x0) - grad u(x0).(x - x0), so that u(x0) = 0 and grad u(x0) = 0.
  SymplecticPotential normalized(const Vec& x0) const;
  /// Smooth part with the affine term folded into its samples.
  SmoothPart folded_smooth() const;

  /// min_k l_k(x) >= margin, up to rounding.
  bool in_margin(const Vec& x) const;
  /// Strictly inside P (every weighted l_k > 0) and inside the spline box.
  bool in_domain(const Vec& x) const;

  /// Derivatives up to `order`; x must lie in the margin region.
  Derivatives derivatives(const Vec& x, int order) const;
  /// Same, for any interior point.
  Derivatives derivatives_interior(const Vec& x, int order) const;
  /// Interior evaluation with the facet values supplied by the caller. Used
  /// on segments ending on the boundary, where l_k is known exactly.
  Derivatives derivatives_with_facets(const Vec& x, const Eigen::VectorXd& l, int order) const;

 private:
  Polytope P_;
  SmoothPart f_;
  double margin_ = 0.0;
  Eigen::VectorXd weights_;
  Vec affine_a_;
  double affine_b_ = 0.0;
};

/// Closed-form u0 derivatives with unit weights.
Derivatives guillemin_derivs(const Polytope& P, const Vec& x, int order);

/// Checked evaluation in the margin region.
inline Derivatives eval_derivs(const SymplecticPotential& u, const Vec& x, int order) {
  return u.derivatives(x, order);
}

struct ConvexityReport {
  double min_eigenvalue = 0.0;
  Vec witness;
  std::size_t points = 0;
  bool pass = false;
};

/// Smallest Hessian eigenvalue over the grid points.
ConvexityReport convexity_check(const SymplecticPotential& u, const QuadratureGrid& grid);

/// Legendre dual: xi = grad u(x), phi = <x, xi> - u(x).
struct KahlerDualPoint {
  Vec xi;
  double phi = 0.0;
};

KahlerDualPoint legendre_forward(const SymplecticPotential& u, const Vec& x);

/// Solves grad u(x) = xi by damped Newton from the polytope centre.
/// Throws DomainError when xi is not attained in the margin region and
/// ConvergenceError after the iteration cap.
Vec legendre_inverse(const SymplecticPotential& u, const Vec& xi, double tol = 1e-10);

}  // namespace toric
