#include "toric/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "toric/geometry.hpp"

namespace toric {

namespace {

constexpr double kLengthConstant = 1.0 / (std::numbers::sqrt2 - 1.0);

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
  }
  return r;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec random_unit(std::mt19937_64& rng, int n) {
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) {
      const double a = 1.0 - uniform01(rng), b = uniform01(rng);
      v(i) = std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
    }
  } while (v.norm() < 1e-12);
  return v.normalized();
}

// Axes, facet normals and seeded random unit vectors.
std::vector<Vec> probe_directions(const Polytope& P, int random, std::mt19937_64& rng) {
  const int n = P.dim();
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(Vec::Unit(n, i));
  if (n > 1)
    for (int k = 0; k < P.facet_count(); ++k) dirs.push_back(P.normal(k).normalized());
  for (int r = 0; r < random; ++r) dirs.push_back(random_unit(rng, n));
  return dirs;
}

double quad(const Mat& M, const Vec& v) { return v.dot(M * v); }

Mat inverse_spd(const Mat& H) { return H.llt().solve(Mat::Identity(H.rows(), H.cols())); }

struct Checker {
  EstimateReport& rep;

  void add(const Vec& original, double margin) {
    rep.points.push_back(original);
    rep.margins.push_back(margin);
  }
};

struct Setup {
  SymplecticPotential v;  // potential the lemma is checked on
  double lambda = 1.0;
};

// Dilates so that sup|F| over the grid is at most one.
Setup unit_curvature(const SymplecticPotential& u, const EstimateParams& params) {
  Setup s;
  const double sup = grid_extremes(u, params.grid_h).sup_F;
  if (sup > 1.0) {
    s.lambda = sup;
    s.v = rescale(u, sup).potential;
  } else {
    s.v = u;
  }
  return s;
}

// Segment from p to the nearer end of the longest chord through p in
// direction e that has p as its midpoint.
std::pair<Vec, double> half_chord(const Polytope& P, const Vec& p, const Vec& e) {
  const RayHit fwd = ray_exit(P, p, e), back = ray_exit(P, p, -e);
  return fwd.t <= back.t ? std::pair{fwd.point, fwd.t} : std::pair{back.point, back.t};
}

void check_length_bound(const SymplecticPotential& u, const std::vector<Vec>& samples, double M,
                        const std::vector<Vec>& dirs, Checker& c) {
  const Polytope& P = u.polytope();
  for (const Vec& p : samples)
    for (const Vec& e : dirs) {
      const auto [end, s] = half_chord(P, p, e);
      for (double frac : {1.0, 0.5, 0.25}) {
        const Vec q = p + frac * (end - p);
        const double L = frac == 1.0 ? riemannian_length_to_boundary(u, p, q) : riemannian_length(u, {p, q});
        c.add(p, kLengthConstant * std::sqrt(M * frac * s) - L);
      }
    }
}

void check_dist_corner(const SymplecticPotential& u, const std::vector<Vec>& samples, double M, Checker& c) {
  for (const Vec& p : samples) {
    const double D = dist_boundary_riemannian(u, p);
    c.add(p, kLengthConstant * std::sqrt(M * euclid_dist_boundary(u.polytope(), p)) - D);
  }
}

void check_curv_ineq(const SymplecticPotential& u, const std::vector<Vec>& samples, const std::vector<Vec>& dirs,
                     Checker& c) {
  const int n = u.dim();
  for (const Vec& p : samples) {
    const Derivatives d = u.derivatives(p, 4);
    const double F = curvature_from_bundle(d).fnorm;
    for (const Vec& e : dirs) {
      const double h = quad(d.hessian, e);
      double h1 = 0.0, h2 = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            h1 += d.third(i, j, k) * e(i) * e(j) * e(k);
            for (int l = 0; l < n; ++l) h2 += d.fourth(i, j, k, l) * e(i) * e(j) * e(k) * e(l);
          }
      const double lhs = 2.0 * h1 * h1 / (h * h * h) - h2 / (h * h);
      c.add(p, F - lhs);
    }
  }
}

void check_hess_upper(const Setup& s, const std::vector<Vec>& samples, double M, const std::vector<Vec>& dirs,
                      Checker& c) {
  const Polytope& P = s.v.polytope();
  for (const Vec& p0 : samples) {
    const Vec p = s.lambda * p0;
    const Mat H = s.v.derivatives(p, 2).hessian;
    for (const Vec& e : dirs) {
      const double R = std::min(ray_exit(P, p, e).t, ray_exit(P, p, -e).t) / 3.0;
      // The M-condition on the pair the bound is derived from.
      const double Mp = std::max(M, v_value(s.v, p - R * e, p + R * e));
      const double bound = std::max(2.0 * Mp / (std::numbers::pi * R), 2.0 * std::pow(Mp / std::numbers::pi, 2));
      c.add(p0, bound - quad(H, e));
    }
  }
}

void check_sinh_mono(const Setup& s, const std::vector<Vec>& samples, const std::vector<Vec>& dirs,
                     const std::vector<Vec>& fields, Checker& c) {
  for (const Vec& p0 : samples) {
    const Vec p = s.lambda * p0;
    for (const Vec& w : dirs) {
      const GeodesicPath path = geodesic_shoot(s.v, p, w, 1.5);
      for (const Vec& nu : fields) {
        double worst = std::numeric_limits<double>::infinity();
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < path.points.size(); ++k) {
          const Mat G = inverse_spd(s.v.derivatives(path.points[k], 2).hessian);
          const double r = std::sqrt(quad(G, nu)) / std::sinh(path.t[k]);
          if (std::isfinite(prev)) worst = std::min(worst, prev - r);
          prev = r;
        }
        if (std::isfinite(worst)) c.add(p0, worst);
      }
    }
  }
}

void check_facet_distance(const Setup& s, const std::vector<Vec>& samples, bool defining, Checker& c) {
  const Polytope& P = s.v.polytope();
  for (const Vec& p0 : samples) {
    const Vec p = s.lambda * p0;
    const Eigen::VectorXd l = facet_values(P, p);
    const Mat G = inverse_spd(s.v.derivatives(p, 2).hessian);
    for (int k = 0; k < P.facet_count(); ++k) {
      const double D = dist_boundary_riemannian(s.v, p, k);
      if (defining)
        c.add(p0, std::cosh(D) - 1.0 - l(k));
      else
        c.add(p0, std::pow(std::sinh(D), 2) - quad(G, P.normal(k)));
    }
  }
}

// Lower bound for Dist_g(p, boundary): the metric dominates min_eig * Euclidean.
double alpha_bound(const Setup& s, double min_eig, const Vec& p) {
  return std::sqrt(std::max(0.0, min_eig)) * euclid_dist_boundary(s.v.polytope(), p);
}

void check_hess_ratio(const Setup& s, const std::vector<Vec>& samples, double min_eig, const std::vector<Vec>& dirs,
                      Checker& c) {
  for (const Vec& p0 : samples) {
    const Vec p = s.lambda * p0;
    const double alpha = alpha_bound(s, min_eig, p);
    if (!(alpha > 0.0)) throw DomainError("HESS_RATIO: no positive distance bound at a sample");
    const Mat Gp = inverse_spd(s.v.derivatives(p, 2).hessian);
    for (const Vec& w : dirs)
      for (double frac : {0.25, 0.5, 1.0, 2.0}) {
        const GeodesicPath path = geodesic_shoot(s.v, p, w, frac * alpha);
        const double d = path.t.back();
        if (!(d > 0.0)) continue;
        const Mat Gq = inverse_spd(s.v.derivatives(path.points.back(), 2).hessian);
        const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Gq, Gp, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(es.eigenvalues().size() - 1);
        double margin = std::pow(std::sinh(alpha + d) / std::sinh(alpha), 2) - hi;
        if (d < alpha) margin = std::min(margin, lo - std::pow(std::sinh(alpha - d) / std::sinh(alpha), 2));
        c.add(p0, margin);
      }
  }
}

void check_elliptic_balls(const Setup& s, const std::vector<Vec>& samples, double min_eig,
                          const std::vector<Vec>& dirs, Checker& c) {
  for (const Vec& p0 : samples) {
    const Vec p = s.lambda * p0;
    const double alpha = alpha_bound(s, min_eig, p);
    if (!(alpha > 0.0)) throw DomainError("ELLIPTIC_BALLS: no positive distance bound at a sample");
    const Mat H = s.v.derivatives(p, 2).hessian;
    for (double beta : {0.5 * alpha, 0.9 * alpha}) {
      const double cin = std::sinh(alpha - beta) / std::sinh(alpha);
      const double cout = std::sinh(alpha + beta) / std::sinh(alpha);
      for (const Vec& e : dirs) {
        // Boundary of E(p, c beta) lies in the g-ball: the straight segment is short enough.
        const Vec q = p + cin * beta * e / std::sqrt(quad(H, e));
        c.add(p0, beta - riemannian_length(s.v, {p, q}));
        // Geodesics of length beta end inside E(p, C beta).
        const GeodesicPath path = geodesic_shoot(s.v, p, e, beta);
        if (path.reason != "time reached") continue;
        c.add(p0, cout * beta - std::sqrt(quad(H, Vec(path.points.back() - p))));
      }
    }
  }
}

}  // namespace

RescaledProblem rescale(const SymplecticPotential& u, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("rescale: lambda must be positive");
  RescaledProblem r;
  r.lambda = lambda;
  const Polytope& P = u.polytope();
  r.polytope = P.scaled(lambda);
  // lambda * u0(x / lambda) = u0~(x) - (log lambda / 2) sum_k w_k l~_k(x).
  const double half_log = 0.5 * std::log(lambda);
  Vec a = u.affine_gradient();
  double b = lambda * u.affine_constant();
  for (int k = 0; k < P.facet_count(); ++k) {
    const double w = u.weights()(k);
    if (w == 0.0) continue;
    a -= half_log * w * P.normal(k);
    b += half_log * w * lambda * P.offsets()(k);
  }
  SymplecticPotential v(r.polytope, u.smooth().scaled(lambda), lambda * u.margin(), u.weights());
  r.potential = v.plus_affine(a, b);
  return r;
}

RescalingReport verify_rescaling(const SymplecticPotential& u, double lambda, const std::vector<Vec>& samples,
                                 const MSampling& sampling) {
  RescalingReport rep;
  rep.lambda = lambda;
  const RescaledProblem r = rescale(u, lambda);
  for (const Vec& p : samples) {
    const CurvatureReport c = curvature_at(u, p);
    const CurvatureReport ct = curvature_at(r.potential, Vec(lambda * p));
    const double rf = std::abs(ct.fnorm - c.fnorm / lambda);
    const double ra = std::abs(ct.A - c.A / lambda);
    rep.max_F_residual = std::max(rep.max_F_residual, rf);
    rep.max_A_residual = std::max(rep.max_A_residual, ra);
    rep.max_relative = std::max(rep.max_relative, std::max(rf, ra) / (1.0 + c.fnorm / lambda));
    ++rep.samples;
  }
  rep.M_source = estimate_M(u, sampling).M_hat;
  rep.M_rescaled = estimate_M(r.potential, sampling).M_hat;
  rep.pass = rep.max_relative <= 1e-8;
  return rep;
}

bool is_lemma_id(std::string_view id) {
  return std::find(kLemmaIds.begin(), kLemmaIds.end(), id) != kLemmaIds.end();
}

std::vector<Vec> interior_samples(const Polytope& P, int count, double min_l, std::uint64_t seed) {
  static constexpr int kPrimes[kMaxDim] = {2, 3, 5, 7};
  const int n = P.dim();
  std::vector<Vec> out;
  for (std::uint64_t i = 1 + seed; static_cast<int>(out.size()) < count; ++i) {
    if (i > seed + (1ull << 24)) throw DomainError("interior_samples: no points with the requested clearance");
    Vec x(n);
    for (int d = 0; d < n; ++d)
      x(d) = P.box_lo()(d) + radical_inverse(i, kPrimes[d]) * (P.box_hi()(d) - P.box_lo()(d));
    if (min_facet_value(P, x) >= min_l) out.push_back(x);
  }
  return out;
}

GridExtremes grid_extremes(const SymplecticPotential& u, double h) {
  const QuadratureGrid g = build_grid(u.polytope(), h, u.margin());
  GridExtremes e;
  e.min_hess_eig = std::numeric_limits<double>::infinity();
  e.sup_F = -1.0;
  for (const Vec& x : g.points) {
    const CurvatureReport c = curvature_at(u, x);
    if (c.fnorm > e.sup_F) {
      e.sup_F = c.fnorm;
      e.argmax_F = x;
    }
    e.min_hess_eig = std::min(
        e.min_hess_eig, Eigen::SelfAdjointEigenSolver<Mat>(c.hessian, Eigen::EigenvaluesOnly).eigenvalues()(0));
  }
  return e;
}

EstimateReport verify_estimate(const SymplecticPotential& u, std::string_view lemma, std::vector<Vec> samples,
                               const EstimateParams& params) {
  if (!is_lemma_id(lemma)) throw ParseError("unknown lemma id '" + std::string(lemma) + "'");
  const Polytope& P = u.polytope();
  EstimateReport rep;
  rep.lemma = std::string(lemma);
  rep.tolerance = params.tolerance;

  std::ostringstream desc;
  if (samples.empty()) {
    double diam = 0.0;
    for (int d = 0; d < P.dim(); ++d) diam = std::max(diam, P.box_hi()(d) - P.box_lo()(d));
    samples = interior_samples(P, 12, 0.05 * diam, params.seed);
    desc << "12 Halton points with min l >= " << 0.05 * diam;
  } else {
    desc << samples.size() << " given points";
  }
  desc << ", " << params.directions << " random directions, seed " << params.seed;
  rep.description = desc.str();

  std::mt19937_64 rng(params.seed);
  const std::vector<Vec> dirs = probe_directions(P, params.directions, rng);
  Checker c{rep};

  auto M_value = [&]() { return params.M > 0.0 ? params.M : estimate_M(u, params.sampling).M_hat; };

  if (lemma == "LENGTH_BOUND") {
    rep.M = M_value();
    check_length_bound(u, samples, rep.M, dirs, c);
  } else if (lemma == "DIST_CORNER") {
    rep.M = M_value();
    check_dist_corner(u, samples, rep.M, c);
  } else if (lemma == "CURV_INEQ") {
    check_curv_ineq(u, samples, dirs, c);
  } else {
    const Setup s = unit_curvature(u, params);
    rep.lambda = s.lambda;
    if (lemma == "HESS_UPPER") {
      rep.M = M_value();
      check_hess_upper(s, samples, rep.M, dirs, c);
    } else if (lemma == "SINH_MONO") {
      std::vector<Vec> fields;
      for (int i = 0; i < P.dim(); ++i) fields.push_back(Vec::Unit(P.dim(), i));
      for (int k = 0; k < P.facet_count(); ++k) fields.push_back(P.normal(k));
      check_sinh_mono(s, samples, dirs, fields, c);
    } else if (lemma == "SINH_SQ" || lemma == "DEFINING_BOUND") {
      check_facet_distance(s, samples, lemma == "DEFINING_BOUND", c);
    } else {
      const double min_eig = grid_extremes(u, params.grid_h).min_hess_eig / s.lambda;
      if (lemma == "HESS_RATIO")
        check_hess_ratio(s, samples, min_eig, dirs, c);
      else
        check_elliptic_balls(s, samples, min_eig, dirs, c);
    }
  }

  if (rep.margins.empty()) throw DomainError(rep.lemma + ": no checkable samples");
  const auto it = std::min_element(rep.margins.begin(), rep.margins.end());
  rep.min_margin = *it;
  rep.witness = rep.points[static_cast<std::size_t>(it - rep.margins.begin())];
  rep.pass = rep.min_margin >= -rep.tolerance;
  return rep;
}

std::string limit_model(int m, int n) {
  if (m > n) return "bounded";
  if (m == 0) return "R^" + std::to_string(n);
  if (m == n) return "(R+)^" + std::to_string(m);
  return "(R+)^" + std::to_string(m) + " x R^" + std::to_string(n - m);
}

std::vector<SingularityEvent> detect_singularity(const FlowRun& run, const SingularityThresholds& thresholds) {
  if (run.records.empty() && run.initial.argmax_F.size() == 0) throw DomainError("detect_singularity: empty trajectory");
  const Polytope& P = run.final_state.u.polytope();
  std::vector<SingularityEvent> events;
  constexpr std::size_t kInitial = static_cast<std::size_t>(-1);
  for (std::size_t i = kInitial; i == kInitial || i < run.records.size(); ++i) {
    const DiagnosticsRecord& rec = i == kInitial ? run.initial : run.records[i];
    if (!(rec.sup_F > thresholds.sup_F)) continue;
    SingularityEvent ev;
    ev.record = i;
    ev.t = rec.t;
    ev.point = rec.argmax_F;
    ev.lambda = rec.sup_F;
    for (int k = 0; k < P.facet_count(); ++k)
      if (ev.lambda * euclid_dist_facet(P, k, ev.point) < thresholds.retention) ev.retained_facets.push_back(k);
    ev.m = static_cast<int>(ev.retained_facets.size());
    ev.classification = ev.m == 0 ? "interior" : "boundary";
    for (const FlowSnapshot& snap : run.snapshots)
      if (snap.record == i) {
        ev.rescaled = rescale(snap.u, ev.lambda);
        ev.rescaled->source_point = ev.point;
        ev.rescaled->time = ev.t;
      }
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace toric
