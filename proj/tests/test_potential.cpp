#include <doctest.h>

#include <cmath>
#include <functional>

#include "fixtures.hpp"

using namespace toric;

TEST_CASE("interval potential in closed form") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  for (double x : {1e-4, 0.1, 0.5, 0.77, 0.999}) {
    const Derivatives d = u.derivatives(fixtures::pt(x), 4);
    CHECK(d.value == doctest::Approx(0.5 * (x * std::log(x) + (1 - x) * std::log(1 - x))).epsilon(1e-12));
    CHECK(d.gradient(0) == doctest::Approx(0.5 * std::log(x / (1 - x))).epsilon(1e-12));
    CHECK(d.hessian(0, 0) == doctest::Approx(0.5 / (x * (1 - x))).epsilon(1e-12));
    CHECK(d.fourth(0, 0, 0, 0) == doctest::Approx(std::pow(x, -3) + std::pow(1 - x, -3)).epsilon(1e-10));
  }
}

TEST_CASE("margin is enforced") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 0.1);
  CHECK(u.in_margin(fixtures::pt(0.5)));
  CHECK_FALSE(u.in_margin(fixtures::pt(0.05)));
  CHECK_THROWS_AS(u.derivatives(fixtures::pt(0.05), 2), DomainError);
  CHECK_NOTHROW(u.derivatives_interior(fixtures::pt(0.05), 2));
}

TEST_CASE("affine part and normalization") {
  const SymplecticPotential u = fixtures::perturbed(fixtures::square(), 0.05);
  const Vec a = fixtures::pt(0.3, -1.25);
  const SymplecticPotential v = u.plus_affine(a, 2.0);
  const Vec x = fixtures::pt(0.4, 0.6);
  const Derivatives du = u.derivatives(x, 4), dv = v.derivatives(x, 4);
  CHECK(dv.value - du.value == doctest::Approx(a.dot(x) + 2.0));
  CHECK((dv.gradient - du.gradient - a).norm() < 1e-14);
  CHECK(dv.hessian == du.hessian);

  const Vec x0 = fixtures::pt(0.25, 0.5);
  const Derivatives dn = u.normalized(x0).derivatives(x0, 1);
  CHECK(std::abs(dn.value) < 1e-14);
  CHECK(dn.gradient.norm() < 1e-13);

  // Folding the affine term into the spline is exact for a linear function.
  const SmoothPart folded = v.folded_smooth();
  CHECK(folded.value(x) == doctest::Approx(v.smooth().value(x) + a.dot(x) + 2.0).epsilon(1e-12));
}

TEST_CASE("flat test mode") {
  const SymplecticPotential u = SymplecticPotential::flat(fixtures::simplex(), 0.1, 1e-6);
  const Derivatives d = u.derivatives(fixtures::pt(0.2, 0.3), 4);
  CHECK(d.value == doctest::Approx(0.5 * 0.13));
  CHECK((d.hessian - Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("convexity") {
  const Polytope P = fixtures::simplex();
  const SymplecticPotential u = fixtures::perturbed(P, 0.05);
  const ConvexityReport r = convexity_check(u, build_grid(P, 1.0 / 16.0, 0.01));
  CHECK(r.pass);
  CHECK(r.min_eigenvalue > 0.0);

  // -x^2 dominates the Hessian near the centre of the square.
  const Polytope S = fixtures::square();
  const SymplecticPotential w = fixtures::perturbed(S, 0.0).with_smooth(SmoothPart::sample(
      SmoothPart::zero(S, 1.0 / 16.0), [](const Vec& x) { return -5.0 * x.squaredNorm(); }));
  const ConvexityReport bad = convexity_check(w, build_grid(S, 1.0 / 16.0, 0.05));
  CHECK_FALSE(bad.pass);
  CHECK(bad.witness.size() == 2);
}

TEST_CASE("legendre transform") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  // xi = 1/2 log(x / (1 - x)) inverts to a logistic.
  for (double xi : {-3.0, -0.2, 0.0, 1.7}) {
    const Vec x = legendre_inverse(u, fixtures::pt(xi));
    CHECK(x(0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * xi))).epsilon(1e-10));
  }
  const KahlerDualPoint k = legendre_forward(u, fixtures::pt(0.25));
  CHECK(k.xi(0) == doctest::Approx(0.5 * std::log(1.0 / 3.0)));
  CHECK(k.phi == doctest::Approx(0.25 * k.xi(0) - u.derivatives(fixtures::pt(0.25), 0).value));
  // Outside the margin region.
  const SymplecticPotential um = u.with_margin(0.01);
  CHECK_THROWS_AS(legendre_inverse(um, fixtures::pt(10.0)), DomainError);
}

TEST_CASE("closed form values at symmetric points") {
  const SymplecticPotential I = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  CHECK(I.derivatives(fixtures::pt(0.5), 2).value == doctest::Approx(-0.346574).epsilon(1e-6));
  const SymplecticPotential S = SymplecticPotential::guillemin(fixtures::simplex(), 1.0 / 16.0, 1e-6);
  CHECK(S.derivatives(fixtures::pt(1.0 / 3.0, 1.0 / 3.0), 0).value == doctest::Approx(-0.549306).epsilon(1e-6));
  // The gradient points away from the nearest facet and blows up there.
  CHECK(I.derivatives(fixtures::pt(1e-5), 1).gradient(0) < -5.0);
}

TEST_CASE("smooth part adds to the closed form") {
  const Polytope P = fixtures::interval();
  const SymplecticPotential u0 = SymplecticPotential::guillemin(P, 1.0 / 16.0, 1e-6);
  const Vec x = fixtures::pt(0.5);
  const Derivatives g = guillemin_derivs(P, x, 4);
  const Derivatives d0 = u0.derivatives(x, 4);
  CHECK(std::abs(d0.value - g.value) < 1e-14);
  CHECK(std::abs(d0.fourth(0, 0, 0, 0) - g.fourth(0, 0, 0, 0)) < 1e-14 * std::abs(g.fourth(0, 0, 0, 0)));

  const auto with = [&](const std::function<double(const Vec&)>& fn) {
    return u0.with_smooth(SmoothPart::sample(u0.smooth(), fn)).derivatives(x, 4);
  };
  const Derivatives da = with([](const Vec& y) { return 3.0 * y(0) - 1.0; });
  CHECK(da.hessian(0, 0) == doctest::Approx(g.hessian(0, 0)).epsilon(1e-12));
  CHECK(da.third(0, 0, 0) == doctest::Approx(g.third(0, 0, 0)).epsilon(1e-9));
  const Derivatives dq = with([](const Vec& y) { return 0.05 * y(0) * y(0); });
  CHECK(dq.hessian(0, 0) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("convexity on the interval") {
  const Polytope P = fixtures::interval();
  const QuadratureGrid g = build_grid(P, 0.1, 0.05);
  const SymplecticPotential u0 = SymplecticPotential::guillemin(P, 1.0 / 16.0, 1e-6);
  const ConvexityReport r = convexity_check(u0, g);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(2.0 / (4.0 * 0.45 * 0.55)));
  const SymplecticPotential bad =
      u0.with_smooth(SmoothPart::sample(u0.smooth(), [](const Vec& y) { return -2.0 * y(0) * y(0); }));
  const ConvexityReport rb = convexity_check(bad, g);
  CHECK_FALSE(rb.pass);
  CHECK(std::abs(rb.witness(0) - 0.5) < 0.1);
  CHECK(convexity_check(SymplecticPotential::flat(P, 0.1, 1e-6), g).min_eigenvalue == doctest::Approx(1.0));
}

TEST_CASE("legendre transform examples") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  const KahlerDualPoint k = legendre_forward(u, fixtures::pt(0.5));
  CHECK(std::abs(k.xi(0)) < 1e-15);
  CHECK(k.phi == doctest::Approx(0.346574).epsilon(1e-6));
  CHECK(legendre_inverse(u, fixtures::pt(0.0))(0) == doctest::Approx(0.5));
  const SymplecticPotential flat = SymplecticPotential::flat(fixtures::square(), 0.1, 1e-6);
  const KahlerDualPoint kf = legendre_forward(flat, fixtures::pt(0.2, 0.7));
  CHECK(kf.xi.isApprox(fixtures::pt(0.2, 0.7)));
  CHECK(kf.phi == doctest::Approx(0.5 * 0.53));
}
