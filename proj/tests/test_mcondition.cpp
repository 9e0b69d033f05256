#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "toric/mcondition.hpp"

using namespace toric;

TEST_CASE("admissible pairs") {
  const Polytope P = fixtures::interval();
  CHECK(admissible(P, fixtures::pt(1.0 / 3.0), fixtures::pt(2.0 / 3.0)));
  CHECK_FALSE(admissible(P, fixtures::pt(0.3), fixtures::pt(0.7)));
  const Polytope S = fixtures::simplex();
  CHECK(admissible(S, fixtures::pt(0.3, 0.3), fixtures::pt(0.35, 0.3)));
  CHECK_FALSE(admissible(S, fixtures::pt(0.1, 0.1), fixtures::pt(0.4, 0.4)));
}

TEST_CASE("V in closed form") {
  const SymplecticPotential flat = SymplecticPotential::flat(fixtures::square(), 1.0 / 8.0, 1e-6);
  CHECK(v_value(flat, fixtures::pt(0.4, 0.4), fixtures::pt(0.5, 0.6)) == doctest::Approx(std::sqrt(0.05)));
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  CHECK(v_value(u, fixtures::pt(1.0 / 3.0), fixtures::pt(2.0 / 3.0)) == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("flat interval sup is the longest admissible chord") {
  const SymplecticPotential flat = SymplecticPotential::flat(fixtures::interval(), 1.0 / 16.0, 1e-6);
  const MEstimate e = estimate_M(flat);
  CHECK(e.M_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("interval estimate") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  const MEstimate e = estimate_M(u);
  CHECK(e.M_hat == doctest::Approx(std::numbers::ln2).epsilon(1e-6));
  CHECK(e.history.size() == 4);
  for (std::size_t i = 1; i < e.history.size(); ++i) CHECK(e.history[i] >= e.history[i - 1]);
  CHECK(admissible(u.polytope(), e.p, e.q));
}

TEST_CASE("affine invariance is exact and sampling is seeded") {
  const SymplecticPotential u = fixtures::perturbed(fixtures::simplex(), 0.05);
  MSampling s;
  s.levels = 2;
  const MEstimate a = estimate_M(u, s);
  const MEstimate b = estimate_M(u.plus_affine(fixtures::pt(7.5, -3.0), 11.0), s);
  CHECK(a.M_hat == b.M_hat);
  const MEstimate c = estimate_M(u, s);
  CHECK(a.M_hat == c.M_hat);
  CHECK(a.p == c.p);
}

TEST_CASE("x log x gives log 2 for doubling pairs") {
  // Weight two on the lower end only: u = x log x.
  const Polytope P = fixtures::interval();
  const SymplecticPotential u(P, SmoothPart::zero(P, 1.0 / 16.0), 1e-6, Eigen::Vector2d(2.0, 0.0));
  for (double x : {0.01, 0.1, 0.3})
    CHECK(v_value(u, fixtures::pt(x), fixtures::pt(2 * x)) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
}

TEST_CASE("admissibility examples") {
  CHECK_FALSE(admissible(fixtures::interval(), fixtures::pt(0.1), fixtures::pt(0.6)));
  CHECK(admissible(fixtures::simplex(), fixtures::pt(0.3, 0.3), fixtures::pt(0.3 + 1e-9, 0.3)));
}

TEST_CASE("V is positive on sampled admissible pairs") {
  const SymplecticPotential u = fixtures::perturbed(fixtures::square(), 0.05);
  int pairs = 0;
  for (double a = 0.1; a < 0.9; a += 0.1)
    for (double b = 0.1; b < 0.9; b += 0.13) {
      const Vec p = fixtures::pt(a, b), q = fixtures::pt(0.5 * (a + 0.5), 0.5 * (b + 0.45));
      if ((p - q).norm() < 1e-9 || !admissible(u.polytope(), p, q)) continue;
      CHECK(v_value(u, p, q) > 0.0);
      ++pairs;
    }
  CHECK(pairs > 10);
}
