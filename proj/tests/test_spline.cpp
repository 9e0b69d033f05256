#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "toric/spline.hpp"

using namespace toric;

TEST_CASE("quintic polynomials are reproduced with derivatives") {
  const Polytope P = fixtures::square();
  const SmoothPart like = SmoothPart::zero(P, 0.125);
  auto poly = [](const Vec& x) { return std::pow(x(0), 5) - 2.0 * x(0) * x(0) * x(1) * x(1) + 0.5 * std::pow(x(1), 4); };
  const SmoothPart f = SmoothPart::sample(like, poly);
  const Vec x = fixtures::pt(0.37, 0.81);
  const Derivatives d = f.derivatives(x, 4);
  CHECK(d.value == doctest::Approx(poly(x)).epsilon(1e-12));
  // Hand derivatives.
  CHECK(d.gradient(0) == doctest::Approx(5 * std::pow(0.37, 4) - 4 * 0.37 * 0.81 * 0.81).epsilon(1e-10));
  CHECK(d.hessian(0, 1) == doctest::Approx(-8 * 0.37 * 0.81).epsilon(1e-10));
  CHECK(d.third(0, 0, 0) == doctest::Approx(60 * 0.37 * 0.37).epsilon(1e-9));
  CHECK(d.fourth(0, 0, 1, 1) == doctest::Approx(-8.0).epsilon(1e-8));
  CHECK(d.fourth(1, 1, 1, 1) == doctest::Approx(12.0).epsilon(1e-8));
}

TEST_CASE("scaled spline") {
  const Polytope P = fixtures::interval();
  const SmoothPart f = SmoothPart::sample(SmoothPart::zero(P, 1.0 / 16.0), [](const Vec& x) { return std::sin(x(0)); });
  const SmoothPart g = f.scaled(2.0);
  CHECK(g.value(fixtures::pt(1.4)) == doctest::Approx(2.0 * f.value(fixtures::pt(0.7))).epsilon(1e-13));
  CHECK(g.derivatives(fixtures::pt(1.4), 2).hessian(0, 0) ==
        doctest::Approx(0.5 * f.derivatives(fixtures::pt(0.7), 2).hessian(0, 0)).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const Polytope P = fixtures::simplex();
  const SmoothPart f =
      SmoothPart::sample(SmoothPart::zero(P, 0.1), [](const Vec& x) { return std::exp(x(0)) / 3.0 + x(1) * 1e-300; });
  std::stringstream s;
  write_checkpoint(s, f);
  const SmoothPart g = read_checkpoint(s);
  CHECK(g.values() == f.values());
  CHECK(g.shape() == f.shape());
  CHECK(g.lo() == f.lo());
  CHECK(g.h() == f.h());
  std::stringstream s2;
  write_checkpoint(s2, g);
  std::stringstream s1;
  write_checkpoint(s1, f);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("bad checkpoints") {
  std::stringstream bad("NOT-A-CHECKPOINT\n");
  CHECK_THROWS_AS(read_checkpoint(bad), ParseError);
  const SmoothPart f = SmoothPart::zero(fixtures::interval(), 0.1);
  std::stringstream s;
  write_checkpoint(s, f);
  std::string text = s.str();
  text.resize(text.size() - 3);
  std::stringstream cut(text);
  CHECK_THROWS_AS(read_checkpoint(cut), ParseError);
}

TEST_CASE("evaluation outside the box throws") {
  const SmoothPart f = SmoothPart::zero(fixtures::interval(), 0.1);
  CHECK_THROWS_AS(f.value(fixtures::pt(1.5)), DomainError);
}
