#include "toric/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace toric {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Gauss-Kronrod 7/15 on [a, b]; returns the Kronrod value and |K - G|.
std::pair<double, double> gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7], g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double f1 = f(c - r * kXgk[j]), f2 = f(c + r * kXgk[j]);
    k += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
  }
  return {k * r, std::abs((k - g) * r)};
}

double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, int depth = 0) {
  const auto [k, err] = gk15(f, a, b);
  if (err <= std::max(rel_tol * std::abs(k), 1e-15) || depth >= 40) return k;
  const double m = 0.5 * (a + b);
  return adaptive(f, a, m, rel_tol, depth + 1) + adaptive(f, m, b, rel_tol, depth + 1);
}

double quad_form(const Mat& H, const Vec& v) { return v.dot(H * v); }

// Orthonormal basis of the hyperplane orthogonal to nu.
std::vector<Vec> tangent_basis(const Vec& nu) {
  const int n = static_cast<int>(nu.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd(nu).householderQr().householderQ();
  std::vector<Vec> out;
  for (int j = 1; j < n; ++j) out.push_back(Q.col(j));
  return out;
}

}  // namespace

CurvatureReport curvature_at(const SymplecticPotential& u, const Vec& x) {
  CurvatureReport c = curvature_from_bundle(u.derivatives(x, 4));
  c.x = x;
  return c;
}

double scalar_curvature_cofactor(const SymplecticPotential& u, const Vec& x) {
  return scalar_curvature_cofactor_from_bundle(u.derivatives(x, 4));
}

double riemannian_length(const SymplecticPotential& u, const std::vector<Vec>& polyline, double rel_tol) {
  for (const Vec& p : polyline)
    if (!u.in_margin(p)) throw DomainError("riemannian_length: polyline leaves the margin region");
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
    const Vec a = polyline[s];
    const Vec v = polyline[s + 1] - a;
    if (v.norm() == 0.0) continue;
    auto integrand = [&](double t) {
      const Vec x = a + t * v;
      return std::sqrt(std::max(0.0, quad_form(u.derivatives_interior(x, 2).hessian, v)));
    };
    total += adaptive(integrand, 0.0, 1.0, rel_tol);
  }
  return total;
}

double riemannian_length_to_boundary(const SymplecticPotential& u, const Vec& x, const Vec& y, double rel_tol) {
  const Polytope& P = u.polytope();
  const Eigen::VectorXd lx = facet_values(P, x);
  Eigen::VectorXd ly = facet_values(P, y);
  const double scale = 1.0 + lx.cwiseAbs().maxCoeff();
  for (int k = 0; k < ly.size(); ++k)
    if (std::abs(ly(k)) <= 1e-12 * scale) ly(k) = 0.0;
  const Vec v = y - x;
  if (v.norm() == 0.0) return 0.0;
  // s = 1 - tau^2 removes the inverse square root at the boundary end.
  auto integrand = [&](double tau) {
    const double w = tau * tau;
    const Vec p = y + w * (x - y);
    const Eigen::VectorXd l = ly + w * (lx - ly);
    const Derivatives d = u.derivatives_with_facets(p, l, 2);
    return 2.0 * tau * std::sqrt(std::max(0.0, quad_form(d.hessian, v)));
  };
  return adaptive(integrand, 0.0, 1.0, rel_tol);
}

RayHit ray_exit(const Polytope& P, const Vec& x, const Vec& v) {
  RayHit hit;
  hit.t = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd l = facet_values(P, x);
  for (int k = 0; k < P.facet_count(); ++k) {
    const double rate = P.normal(k).dot(v);
    if (rate >= 0.0) continue;
    const double t = l(k) / -rate;
    if (t < hit.t) {
      hit.t = t;
      hit.facet = k;
    }
  }
  if (hit.facet < 0) throw DomainError("ray_exit: ray does not leave the polytope");
  hit.point = x + hit.t * v;
  return hit;
}

GeodesicPath geodesic_shoot(const SymplecticPotential& u, const Vec& x0, const Vec& v0, double t_max) {
  if (!u.in_margin(x0)) throw DomainError("geodesic_shoot: start point outside the margin region");
  const int n = u.dim();
  GeodesicPath path;
  const double speed = std::sqrt(quad_form(u.derivatives(x0, 2).hessian, v0));
  if (!(speed > 0.0)) throw DomainError("geodesic_shoot: zero initial velocity");
  path.x0 = x0;
  path.v0 = v0 / speed;

  // y = (x, v); returns false when an evaluation leaves the margin region.
  using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;
  auto rhs = [&](const State& y, State& dy) {
    const Vec x = y.head(n), v = y.tail(n);
    if (!u.in_margin(x)) return false;
    const Derivatives d = u.derivatives(x, 3);
    const Mat G = d.hessian.llt().solve(Mat::Identity(n, n));
    Vec w = Vec::Zero(n);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(l) += d.third(i, j, l) * v(i) * v(j);
    dy.resize(2 * n);
    dy.head(n) = v;
    dy.tail(n) = -0.5 * (G * w);
    return true;
  };
  auto rk4 = [&](const State& y, double h, State& out) {
    State k1, k2, k3, k4;
    if (!rhs(y, k1)) return false;
    if (!rhs(State(y + 0.5 * h * k1), k2)) return false;
    if (!rhs(State(y + 0.5 * h * k2), k3)) return false;
    if (!rhs(State(y + h * k3), k4)) return false;
    out = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return u.in_margin(Vec(out.head(n)));
  };

  State y(2 * n);
  y.head(n) = x0;
  y.tail(n) = path.v0;
  double t = 0.0;
  double h = std::min(0.05, t_max);
  path.points.push_back(x0);
  path.velocities.push_back(path.v0);
  path.t.push_back(0.0);
  constexpr double kTol = 1e-11;
  constexpr double kMinStep = 1e-9;
  path.reason = "time reached";
  while (t < t_max) {
    h = std::min(h, t_max - t);
    State full, half, twice;
    const bool ok = rk4(y, h, full) && rk4(y, 0.5 * h, half) && rk4(half, 0.5 * h, twice);
    if (!ok) {
      if (h < kMinStep) {
        path.reason = "hit margin boundary";
        break;
      }
      h *= 0.5;
      continue;
    }
    const double err = (twice - full).norm() / 15.0;
    if (err > kTol) {
      if (h < 1e-14) throw ConvergenceError("geodesic_shoot: step size underflow");
      h *= std::max(0.2, 0.9 * std::pow(kTol / err, 0.2));
      continue;
    }
    y = twice + (twice - full) / 15.0;
    t += h;
    const Vec x = y.head(n), v = y.tail(n);
    if (!u.in_margin(x)) {
      path.reason = "hit margin boundary";
      break;
    }
    path.points.push_back(x);
    path.velocities.push_back(v);
    path.t.push_back(t);
    path.max_speed_drift =
        std::max(path.max_speed_drift, std::abs(quad_form(u.derivatives(x, 2).hessian, v) - 1.0));
    h *= err > 0.0 ? std::min(2.0, 0.9 * std::pow(kTol / err, 0.2)) : 2.0;
  }
  return path;
}

double dist_boundary_riemannian(const SymplecticPotential& u, const Vec& x, int facet) {
  const Polytope& P = u.polytope();
  const int n = P.dim();
  if (!u.in_domain(x) || min_facet_value(P, x) <= 0.0) throw DomainError("dist_boundary_riemannian: x not interior");
  double best = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  for (int d = 0; d < n; ++d) diam = std::max(diam, P.box_hi()(d) - P.box_lo()(d));

  auto on_facet = [&](const Vec& y, int k) {
    const Eigen::VectorXd l = facet_values(P, y);
    const double tol = 1e-12 * (1.0 + diam);
    if (std::abs(l(k)) > tol) return false;
    for (int j = 0; j < P.facet_count(); ++j)
      if (l(j) < -tol) return false;
    return true;
  };

  for (int k = 0; k < P.facet_count(); ++k) {
    if (facet >= 0 && k != facet) continue;
    const Vec nu = P.normal(k);
    const double lk = facet_values(P, x)(k);
    std::vector<Vec> targets;
    // Foot of the perpendicular, if it lands on the facet.
    const Vec foot = x - lk * nu / nu.squaredNorm();
    if (on_facet(foot, k)) targets.push_back(foot);
    // Facet vertices, their centroid and the midpoints towards each vertex.
    std::vector<Vec> fv;
    for (std::size_t v = 0; v < P.vertices().size(); ++v) {
      const auto& act = P.active_facets()[v];
      if (std::find(act.begin(), act.end(), k) != act.end()) fv.push_back(P.vertices()[v]);
    }
    Vec centroid = Vec::Zero(n);
    for (const Vec& v : fv) centroid += v;
    if (!fv.empty()) {
      centroid /= static_cast<double>(fv.size());
      targets.push_back(centroid);
      for (const Vec& v : fv) {
        targets.push_back(0.5 * (centroid + v));
        if (on_facet(foot, k)) targets.push_back(0.5 * (foot + v));
      }
    }
    // Tilted rays around the inward normal.
    const Vec nhat = -nu.normalized();
    const auto basis = tangent_basis(nu);
    for (const Vec& e : basis)
      for (double ang : {0.3, 0.6})
        for (double sgn : {-1.0, 1.0}) {
          const Vec dir = std::cos(ang) * nhat + sgn * std::sin(ang) * e;
          const RayHit hit = ray_exit(P, x, dir);
          if (hit.facet == k || on_facet(hit.point, k)) targets.push_back(hit.point);
        }

    double facet_best = std::numeric_limits<double>::infinity();
    Vec best_y;
    for (const Vec& y : targets) {
      const double L = riemannian_length_to_boundary(u, x, y);
      if (L < facet_best) {
        facet_best = L;
        best_y = y;
      }
    }
    // Pattern search over the facet from the best fan target.
    if (!basis.empty() && std::isfinite(facet_best)) {
      double step = 0.25 * diam;
      while (step > 1e-4 * diam) {
        bool improved = false;
        for (const Vec& e : basis)
          for (double sgn : {-1.0, 1.0}) {
            const Vec y = best_y + sgn * step * e;
            if (!on_facet(y, k)) continue;
            const double L = riemannian_length_to_boundary(u, x, y);
            if (L < facet_best) {
              facet_best = L;
              best_y = y;
              improved = true;
            }
          }
        if (!improved) step *= 0.5;
      }
    }
    best = std::min(best, facet_best);
  }
  return best;
}

}  // namespace toric
