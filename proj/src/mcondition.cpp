#include "toric/mcondition.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "toric/geometry.hpp"

namespace toric {

namespace {

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
      // Box-Muller; the cosine branch is enough.
      const double a = 1.0 - uniform01(rng), b = uniform01(rng);
      v(i) = std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
    }
  } while (v.norm() < 1e-12);
  return v.normalized();
}

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

struct Best {
  double M = -std::numeric_limits<double>::infinity();
  Vec p, q;

  void offer(double v, const Vec& p1, const Vec& q1) {
    if (v > M || (v == M && (lex_less(p1, p) || (!lex_less(p, p1) && lex_less(q1, q))))) {
      M = v;
      p = p1;
      q = q1;
    }
  }
};

bool strictly_interior(const Polytope& P, const Vec& x) { return min_facet_value(P, x) > 0.0; }

// V only sees u modulo affine functions; dropping the stored affine term makes
// that exact in floating point.
SymplecticPotential without_affine(const SymplecticPotential& u) {
  return u.plus_affine(-u.affine_gradient(), -u.affine_constant());
}

}  // namespace

double v_value(const SymplecticPotential& u0, const Vec& p, const Vec& q) {
  const SymplecticPotential u = without_affine(u0);
  const Vec d = q - p;
  const double len = d.norm();
  if (len == 0.0) throw DomainError("v_value: p and q coincide");
  const Vec gp = u.derivatives(p, 1).gradient;
  const Vec gq = u.derivatives(q, 1).gradient;
  return (gq - gp).dot(d) / len;
}

bool admissible(const Polytope& P, const Vec& p, const Vec& q) {
  if ((p - q).norm() == 0.0) return false;
  const Vec a = 2.0 * p - q, b = 2.0 * q - p;
  double scale = 1.0;
  for (int k = 0; k < P.facet_count(); ++k) scale = std::max(scale, std::abs(P.offsets()(k)));
  const double tol = 1e-12 * scale;
  return min_facet_value(P, a) >= -tol && min_facet_value(P, b) >= -tol;
}

MEstimate estimate_M(const SymplecticPotential& u0, const MSampling& s) {
  const SymplecticPotential u = without_affine(u0);
  const Polytope& P = u.polytope();
  const int n = P.dim();
  MEstimate est;
  est.seed = s.seed;

  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(Vec::Unit(n, i));
  for (int k = 0; k < P.facet_count(); ++k) dirs.push_back(P.normal(k).normalized());
  std::mt19937_64 rng(s.seed);
  for (int r = 0; r < s.random_directions; ++r) dirs.push_back(random_unit(rng, n));

  // Anchors on the boundary: vertices and facet centres.
  std::vector<Vec> boundary_anchors = P.vertices();
  for (int k = 0; k < P.facet_count(); ++k) {
    Vec c = Vec::Zero(n);
    int cnt = 0;
    for (std::size_t v = 0; v < P.vertices().size(); ++v)
      for (int a : P.active_facets()[v])
        if (a == k) {
          c += P.vertices()[v];
          ++cnt;
        }
    if (cnt > 0) boundary_anchors.push_back(c / cnt);
  }

  static constexpr int kPrimes[kMaxDim] = {2, 3, 5, 7};
  Best best;
  std::uint64_t halton_next = 1;
  std::vector<Vec> anchors = boundary_anchors;
  anchors.push_back(P.center());

  auto grad = [&](const Vec& x, Vec& g) {
    if (!u.in_domain(x) || !strictly_interior(P, x)) return false;
    g = u.derivatives_interior(x, 1).gradient;
    return true;
  };

  for (int level = 0; level < s.levels; ++level) {
    const int want = s.anchors << level;
    int added = 0;
    while (added < want && halton_next < (1ull << 40)) {
      Vec a(n);
      for (int d = 0; d < n; ++d)
        a(d) = P.box_lo()(d) + radical_inverse(halton_next, kPrimes[d]) * (P.box_hi()(d) - P.box_lo()(d));
      ++halton_next;
      if (!strictly_interior(P, a)) continue;
      anchors.push_back(a);
      ++added;
    }
    const int N = 3 * (2 << level);

    for (const Vec& a : anchors) {
      for (const Vec& d : dirs) {
        double t_plus = 0.0, t_minus = 0.0;
        try {
          t_plus = ray_exit(P, a, d).t;
          t_minus = ray_exit(P, a, -d).t;
        } catch (const DomainError&) {
          continue;
        }
        const Vec e0 = a - t_minus * d, e1 = a + t_plus * d;
        const double L = t_plus + t_minus;
        if (!(L > 1e-12) || !strictly_interior(P, 0.5 * (e0 + e1))) continue;
        ++est.lines;

        std::vector<Vec> z(static_cast<std::size_t>(N + 1)), g(static_cast<std::size_t>(N + 1));
        std::vector<char> ok(static_cast<std::size_t>(N + 1), 0);
        for (int i = 0; i <= N; ++i) {
          z[static_cast<std::size_t>(i)] = e0 + (static_cast<double>(i) / N) * (e1 - e0);
          if (i > 0 && i < N) ok[static_cast<std::size_t>(i)] = grad(z[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i)]);
        }
        for (int r = 1; 3 * r <= N; ++r)
          for (int i = 0; i + 3 * r <= N; ++i) {
            const auto ip = static_cast<std::size_t>(i + r), iq = static_cast<std::size_t>(i + 2 * r);
            if (!ok[ip] || !ok[iq]) continue;
            ++est.pairs;
            best.offer((g[iq] - g[ip]).dot(d), z[ip], z[iq]);
          }
        // Short admissible segments pressed against either chord end.
        for (int j = 1; j <= s.boundary_steps; ++j) {
          const double r = L / 3.0 * std::ldexp(1.0, -j);
          for (int side = 0; side < 2; ++side) {
            const Vec& e = side == 0 ? e0 : e1;
            const Vec dd = side == 0 ? Vec(d) : Vec(-d);
            const Vec p = e + r * dd, q = e + 2.0 * r * dd;
            Vec gp, gq;
            if (!grad(p, gp) || !grad(q, gq)) continue;
            ++est.pairs;
            best.offer((gq - gp).dot(dd), p, q);
          }
        }
      }
    }
    est.history.push_back(std::max(0.0, best.M));
  }
  est.M_hat = std::max(0.0, best.M);
  est.p = best.p;
  est.q = best.q;
  return est;
}

}  // namespace toric
