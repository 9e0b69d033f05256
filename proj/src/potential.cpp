#include "toric/potential.hpp"

#include <cmath>

namespace toric {

SymplecticPotential::SymplecticPotential(Polytope P, SmoothPart f, double margin)
    : SymplecticPotential(P, std::move(f), margin, Eigen::VectorXd::Ones(P.facet_count())) {}

SymplecticPotential::SymplecticPotential(Polytope P, SmoothPart f, double margin, Eigen::VectorXd weights)
    : P_(std::move(P)), f_(std::move(f)), margin_(margin), weights_(std::move(weights)) {
  if (f_.dim() != P_.dim()) throw DomainError("potential: smooth part dimension differs from polytope");
  if (weights_.size() != P_.facet_count()) throw DomainError("potential: one weight per facet required");
  if (!(margin_ >= 0.0)) throw DomainError("potential: margin must be nonnegative");
  for (int d = 0; d < P_.dim(); ++d)
    if (f_.lo()(d) > P_.box_lo()(d) + 1e-12 || f_.hi()(d) < P_.box_hi()(d) - 1e-12)
      throw DomainError("potential: spline grid does not cover the polytope");
  affine_a_ = Vec::Zero(P_.dim());
}

SymplecticPotential SymplecticPotential::guillemin(const Polytope& P, double h, double margin) {
  return SymplecticPotential(P, SmoothPart::zero(P, h), margin);
}

SymplecticPotential SymplecticPotential::flat(const Polytope& P, double h, double margin) {
  const SmoothPart f = SmoothPart::sample(SmoothPart::zero(P, h), [](const Vec& x) { return 0.5 * x.squaredNorm(); });
  return SymplecticPotential(P, f, margin, Eigen::VectorXd::Zero(P.facet_count()));
}

SymplecticPotential SymplecticPotential::with_smooth(SmoothPart f) const {
  SymplecticPotential out(P_, std::move(f), margin_, weights_);
  out.affine_a_ = affine_a_;
  out.affine_b_ = affine_b_;
  return out;
}

SymplecticPotential SymplecticPotential::with_margin(double margin) const {
  SymplecticPotential out(*this);
  if (!(margin >= 0.0)) throw DomainError("potential: margin must be nonnegative");
  out.margin_ = margin;
  return out;
}

SymplecticPotential SymplecticPotential::plus_affine(const Vec& a, double b) const {
  SymplecticPotential out(*this);
  out.affine_a_ += a;
  out.affine_b_ += b;
  return out;
}

SymplecticPotential SymplecticPotential::normalized(const Vec& x0) const {
  const Derivatives d = derivatives_interior(x0, 1);
  return plus_affine(-d.gradient, d.gradient.dot(x0) - d.value);
}

SmoothPart SymplecticPotential::folded_smooth() const {
  if (affine_b_ == 0.0 && affine_a_.isZero(0.0)) return f_;
  std::vector<double> v(f_.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += affine_a_.dot(f_.node(i)) + affine_b_;
  return f_.with_values(std::move(v));
}

bool SymplecticPotential::in_margin(const Vec& x) const {
  return min_facet_value(P_, x) >= margin_ - 1e-12 * (1.0 + margin_) && f_.contains(x);
}

bool SymplecticPotential::in_domain(const Vec& x) const {
  if (!f_.contains(x)) return false;
  const Eigen::VectorXd l = facet_values(P_, x);
  for (int k = 0; k < P_.facet_count(); ++k)
    if (weights_(k) != 0.0 && !(l(k) > 0.0)) return false;
  return true;
}

Derivatives SymplecticPotential::derivatives(const Vec& x, int order) const {
  if (!in_margin(x)) throw DomainError("potential: point outside the margin region");
  return derivatives_with_facets(x, facet_values(P_, x), order);
}

Derivatives SymplecticPotential::derivatives_interior(const Vec& x, int order) const {
  return derivatives_with_facets(x, facet_values(P_, x), order);
}

Derivatives SymplecticPotential::derivatives_with_facets(const Vec& x, const Eigen::VectorXd& l, int order) const {
  Derivatives d = guillemin_from_values<double>(P_, weights_, l, order);
  d += f_.derivatives(x, order);
  d.value += affine_a_.dot(x) + affine_b_;
  if (order >= 1) d.gradient += affine_a_;
  return d;
}

Derivatives guillemin_derivs(const Polytope& P, const Vec& x, int order) {
  return guillemin_derivatives<double>(P, x, order);
}

ConvexityReport convexity_check(const SymplecticPotential& u, const QuadratureGrid& grid) {
  ConvexityReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Derivatives d = u.derivatives_interior(grid.points[i], 2);
    const double ev = Eigen::SelfAdjointEigenSolver<Mat>(d.hessian, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (ev < r.min_eigenvalue || std::isnan(ev)) {
      r.min_eigenvalue = ev;
      r.witness = grid.points[i];
    }
  }
  r.points = grid.size();
  r.pass = r.points > 0 && r.min_eigenvalue > 0.0;
  return r;
}

KahlerDualPoint legendre_forward(const SymplecticPotential& u, const Vec& x) {
  const Derivatives d = u.derivatives(x, 1);
  return {d.gradient, x.dot(d.gradient) - d.value};
}

Vec legendre_inverse(const SymplecticPotential& u, const Vec& xi, double tol) {
  if (xi.size() != u.dim()) throw DomainError("legendre_inverse: dimension mismatch");
  if (!xi.allFinite()) throw DomainError("legendre_inverse: xi outside the margin region image");
  // Newton on the convex function psi(x) = u(x) - <xi, x>, damped so that
  // iterates stay where u is defined.
  Vec x = u.polytope().center();
  Derivatives d = u.derivatives_interior(x, 2);
  double psi = d.value - xi.dot(x);
  Vec r = d.gradient - xi;
  constexpr int kMaxIter = 200;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (r.norm() <= tol) {
      if (!u.in_margin(x)) throw DomainError("legendre_inverse: xi outside the margin region image");
      return x;
    }
    const Vec step = -d.hessian.ldlt().solve(r);
    const double slope = r.dot(step);
    double t = 1.0;
    bool moved = false;
    while (t > 1e-18) {
      const Vec y = x + t * step;
      if (u.in_domain(y)) {
        const Derivatives dy = u.derivatives_interior(y, 2);
        const double psi_y = dy.value - xi.dot(y);
        const Vec ry = dy.gradient - xi;
        if (psi_y <= psi + 1e-4 * t * slope || ry.norm() <= (1.0 - 1e-4 * t) * r.norm()) {
          x = y;
          d = dy;
          psi = psi_y;
          r = ry;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) {
      if (!u.in_margin(x)) throw DomainError("legendre_inverse: xi outside the margin region image");
      throw ConvergenceError("legendre_inverse: line search stalled");
    }
  }
  if (!u.in_margin(x)) throw DomainError("legendre_inverse: xi outside the margin region image");
  throw ConvergenceError("legendre_inverse: no convergence within the iteration cap");
}

}  // namespace toric
