#include <doctest.h>

#include "fixtures.hpp"

using namespace toric;

TEST_CASE("interval geometry") {
  const Polytope P = fixtures::interval();
  CHECK(P.dim() == 1);
  CHECK(P.vertices().size() == 2);
  CHECK(P.volume() == doctest::Approx(1.0));
  // Each end point has lattice measure one.
  CHECK(P.boundary_measure() == doctest::Approx(2.0));
  CHECK(delzant_check(P).pass);
}

TEST_CASE("simplex measures") {
  const Polytope P = fixtures::simplex();
  CHECK(P.vertices().size() == 3);
  CHECK(P.volume() == doctest::Approx(0.5));
  // The hypotenuse has Euclidean length sqrt 2 and |normal| = sqrt 2.
  for (int k = 0; k < 3; ++k) CHECK(P.facet_measure(k) == doctest::Approx(1.0));
  CHECK(2.0 * P.boundary_measure() / P.volume() == doctest::Approx(12.0));
  CHECK(P.center().isApprox(fixtures::pt(1.0 / 3.0, 1.0 / 3.0)));
}

TEST_CASE("square and scaling") {
  const Polytope P = fixtures::square();
  CHECK(P.volume() == doctest::Approx(1.0));
  CHECK(P.boundary_measure() == doctest::Approx(4.0));
  const Polytope Q = P.scaled(3.0);
  CHECK(Q.volume() == doctest::Approx(9.0));
  CHECK(Q.boundary_measure() == doctest::Approx(12.0));
  CHECK(Q.box_hi().isApprox(fixtures::pt(3.0, 3.0)));
}

TEST_CASE("delzant failure has a witness vertex") {
  const Polytope P = parse_polytope(
      R"({"dimension":2,"facets":[{"normal":[1,0],"offset":0},{"normal":[0,1],"offset":0},{"normal":[-1,-2],"offset":-2}]})");
  const DelzantReport r = delzant_check(P);
  CHECK_FALSE(r.pass);
  int bad = 0;
  for (const auto& v : r.vertices)
    if (!v.ok) {
      ++bad;
      CHECK(std::abs(v.determinant) == doctest::Approx(2.0));
    }
  CHECK(bad == 1);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_polytope("{"), ParseError);
  CHECK_THROWS_AS(parse_polytope(R"({"dimension":1})"), ParseError);
  CHECK_THROWS_AS(parse_polytope(R"({"dimension":1,"facets":[{"normal":[2],"offset":0},{"normal":[-1],"offset":-1}]})"),
                  InvalidPolytope);
  // Unbounded.
  CHECK_THROWS_AS(parse_polytope(R"({"dimension":1,"facets":[{"normal":[1],"offset":0}]})"), InvalidPolytope);
}

TEST_CASE("json round trip") {
  const Polytope P = fixtures::simplex();
  const Polytope Q = parse_polytope(polytope_to_json(P));
  CHECK(Q.normals() == P.normals());
  CHECK(Q.offsets() == P.offsets());
}

TEST_CASE("quadrature grid") {
  const Polytope P = fixtures::simplex();
  const QuadratureGrid g = build_grid(P, 1.0 / 64.0, 0.0);
  // Midpoint rule on the staircase: area within O(h).
  CHECK(g.total_weight() == doctest::Approx(0.5).epsilon(0.02));
  const QuadratureGrid gm = build_grid(P, 1.0 / 64.0, 0.1);
  for (const Vec& x : gm.points) CHECK(min_facet_value(P, x) >= 0.1 - 1e-12);
  CHECK_THROWS_AS(build_grid(P, 0.25, 0.4), DomainError);
}

TEST_CASE("euclidean distances") {
  const Polytope P = fixtures::simplex();
  const Vec x = fixtures::pt(0.2, 0.3);
  CHECK(euclid_dist_facet(P, 0, x) == doctest::Approx(0.2));
  CHECK(euclid_dist_facet(P, 2, x) == doctest::Approx(0.5 / std::sqrt(2.0)));
  CHECK(euclid_dist_boundary(P, x) == doctest::Approx(0.2));
}

TEST_CASE("interval grid counting") {
  const QuadratureGrid g = build_grid(fixtures::interval(), 0.1, 0.05);
  CHECK(g.size() == 10);
  for (double w : g.weights) CHECK(w == doctest::Approx(0.1));
  REQUIRE(g.facets.size() == 2);
  for (const FacetGrid& f : g.facets) CHECK(f.weights == std::vector<double>{1.0});
}

TEST_CASE("facet values and distances at sample points") {
  const Polytope S = fixtures::simplex();
  CHECK(facet_values(S, fixtures::pt(1.0 / 3.0, 1.0 / 3.0)).isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
  CHECK(facet_values(S, fixtures::pt(0.0, 0.0)).isApprox(Eigen::Vector3d(0, 0, 1)));
  CHECK(facet_values(fixtures::interval(), fixtures::pt(0.25)).isApprox(Eigen::Vector2d(0.25, 0.75)));
  CHECK(euclid_dist_boundary(S, fixtures::pt(1.0 / 3.0, 1.0 / 3.0)) == doctest::Approx(0.2357).epsilon(1e-4));
  CHECK(euclid_dist_boundary(fixtures::square(), fixtures::pt(0.1, 0.5)) == doctest::Approx(0.1));
  CHECK(euclid_dist_boundary(fixtures::interval(), fixtures::pt(0.5)) == doctest::Approx(0.5));
}

TEST_CASE("quadrature weight converges to the simplex area") {
  const Polytope S = fixtures::simplex();
  const double e1 = std::abs(build_grid(S, 1.0 / 32.0, 0.0).total_weight() - 0.5);
  const double e2 = std::abs(build_grid(S, 1.0 / 128.0, 0.0).total_weight() - 0.5);
  CHECK(e2 < e1);
  CHECK(e2 < 0.01);
}
