#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "toric/analysis.hpp"
#include "toric/geometry.hpp"

using namespace toric;

TEST_CASE("limit models") {
  CHECK(limit_model(0, 2) == "R^2");
  CHECK(limit_model(1, 2) == "(R+)^1 x R^1");
  CHECK(limit_model(2, 2) == "(R+)^2");
}

TEST_CASE("rescaled potential matches lambda u(x / lambda)") {
  const SymplecticPotential u = fixtures::perturbed(fixtures::simplex(), 0.05);
  const double lambda = 3.0;
  const RescaledProblem r = rescale(u, lambda);
  CHECK(r.polytope.volume() == doctest::Approx(4.5));
  for (const Vec& x : {fixtures::pt(0.2, 0.3), fixtures::pt(0.6, 0.1)}) {
    const Derivatives d = u.derivatives(x, 2);
    const Derivatives dt = r.potential.derivatives(Vec(lambda * x), 2);
    CHECK(dt.value == doctest::Approx(lambda * d.value).epsilon(1e-12));
    CHECK((dt.gradient - d.gradient).norm() < 1e-12);
    CHECK((dt.hessian - d.hessian / lambda).norm() < 1e-11);
  }
  const RescalingReport rep = verify_rescaling(u, lambda, interior_samples(u.polytope(), 8, 0.05), MSampling{2});
  CHECK(rep.pass);
  CHECK(rep.M_rescaled == doctest::Approx(rep.M_source).epsilon(0.02));
}

TEST_CASE("interior samples") {
  const Polytope P = fixtures::simplex();
  const auto s = interior_samples(P, 20, 0.1, 3);
  CHECK(s.size() == 20);
  for (const Vec& x : s) CHECK(min_facet_value(P, x) >= 0.1);
  CHECK(s == interior_samples(P, 20, 0.1, 3));
}

TEST_CASE("lemma ids") {
  for (auto id : kLemmaIds) CHECK(is_lemma_id(id));
  CHECK_FALSE(is_lemma_id("NOT_A_LEMMA"));
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  CHECK_THROWS_AS(verify_estimate(u, "NOT_A_LEMMA"), ParseError);
}

TEST_CASE("distance to a corner at the interval midpoint") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 32.0, 1e-6);
  EstimateParams prm;
  prm.M = std::numbers::ln2;
  const EstimateReport r = verify_estimate(u, "DIST_CORNER", {fixtures::pt(0.5)}, prm);
  CHECK(r.pass);
  // d = sqrt 2 asin(sqrt 1/2) = pi / (2 sqrt 2).
  const double d = std::numbers::pi / (2.0 * std::numbers::sqrt2);
  CHECK(r.min_margin > 0.0);
  CHECK(r.min_margin < 1.0);
  CHECK(d == doctest::Approx(1.11072).epsilon(1e-5));
}

TEST_CASE("every lemma holds on the guillemin simplex") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::simplex(), 1.0 / 16.0, 1e-6);
  EstimateParams prm;
  prm.sampling.levels = 2;
  const auto samples = interior_samples(u.polytope(), 4, 0.05);
  for (auto id : kLemmaIds) {
    const EstimateReport r = verify_estimate(u, id, samples, prm);
    INFO(id << " " << r.min_margin);
    CHECK(r.pass);
    CHECK(r.margins.size() >= samples.size());
  }
}

TEST_CASE("singularity classification") {
  FlowRun run;
  run.final_state.u = SymplecticPotential::guillemin(fixtures::square(), 1.0 / 8.0, 1e-6);
  run.initial.sup_F = 8.0;
  run.initial.argmax_F = fixtures::pt(0.5, 0.5);
  DiagnosticsRecord near_corner;
  near_corner.t = 0.1;
  near_corner.sup_F = 1e4;
  near_corner.argmax_F = fixtures::pt(1e-4, 2e-4);
  DiagnosticsRecord near_edge = near_corner;
  near_edge.argmax_F = fixtures::pt(0.5, 1e-4);
  DiagnosticsRecord inside = near_corner;
  inside.argmax_F = fixtures::pt(0.5, 0.4);
  run.records = {near_corner, near_edge, inside};
  run.snapshots.push_back({0, run.final_state.u});

  const auto events = detect_singularity(run);
  REQUIRE(events.size() == 3);
  CHECK(events[0].m == 2);
  CHECK(events[0].retained_facets == std::vector<int>{0, 1});
  CHECK(events[0].rescaled.has_value());
  CHECK(events[0].rescaled->polytope.volume() == doctest::Approx(1e8));
  CHECK(events[1].m == 1);
  CHECK(events[1].classification == "boundary");
  CHECK_FALSE(events[1].rescaled.has_value());
  CHECK(events[2].classification == "interior");
}

TEST_CASE("grid extremes") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 16.0, 1e-6);
  const GridExtremes g = grid_extremes(u, 1.0 / 16.0);
  CHECK(g.sup_F == doctest::Approx(4.0).epsilon(1e-9));
  // u'' = 1 / (2x(1-x)) is smallest at the midpoint, the grid misses it by h/2.
  CHECK(g.min_hess_eig == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("rescaling the interval") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 32.0, 1e-6);
  const RescaledProblem r2 = rescale(u, 2.0);
  CHECK(r2.polytope.box_hi()(0) == doctest::Approx(2.0));
  CHECK(curvature_at(r2.potential, fixtures::pt(1.0)).A == doctest::Approx(2.0).epsilon(1e-10));
  const RescaledProblem r4 = rescale(u, 4.0);
  CHECK(grid_extremes(r4.potential, 1.0 / 8.0).sup_F == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(dist_boundary_riemannian(r4.potential, fixtures::pt(2.0)) == doctest::Approx(2.22144).epsilon(1e-5));
  const RescaledProblem r1 = rescale(u, 1.0);
  for (double x : {0.1, 0.5, 0.8}) {
    const Derivatives a = u.derivatives(fixtures::pt(x), 4), b = r1.potential.derivatives(fixtures::pt(x), 4);
    CHECK(a.value == b.value);
    CHECK(a.fourth(0, 0, 0, 0) == b.fourth(0, 0, 0, 0));
  }
  const RescalingReport rep = verify_rescaling(u, 1.0, {fixtures::pt(0.3), fixtures::pt(0.6)}, MSampling{1});
  CHECK(rep.max_relative == 0.0);
}

TEST_CASE("worked lemma instances on the interval") {
  const SymplecticPotential u = SymplecticPotential::guillemin(fixtures::interval(), 1.0 / 32.0, 1e-6);
  const auto samples = interior_samples(u.polytope(), 6, 0.05);
  const EstimateReport curv = verify_estimate(u, "CURV_INEQ", samples);
  CHECK(curv.pass);
  for (double m : curv.margins) CHECK(m == doctest::Approx(8.0).epsilon(1e-8));

  const EstimateReport def = verify_estimate(u, "DEFINING_BOUND", {fixtures::pt(0.5)});
  CHECK(def.lambda == doctest::Approx(4.0));
  // lambda_E = 2 against cosh(2 * 1.11072) - 1.
  CHECK(def.min_margin == doctest::Approx(std::cosh(2.0 * 1.1107207345) - 3.0).epsilon(1e-4));
}

TEST_CASE("healthy run has no events and a zero threshold flags the start") {
  FlowConfig cfg;
  cfg.grid_h = 1.0 / 32.0;
  cfg.perturbation_amplitude = 0.05;
  const FlowRun healthy = run(initial_state(fixtures::interval(), cfg), cfg);
  CHECK(detect_singularity(healthy).empty());

  cfg.sup_F_threshold = 0.0;
  const FlowRun flagged = run(initial_state(fixtures::simplex(), cfg), cfg);
  SingularityThresholds th;
  th.sup_F = 0.0;
  const auto events = detect_singularity(flagged, th);
  REQUIRE(events.size() == 1);
  CHECK(events[0].record == static_cast<std::size_t>(-1));
  CHECK(events[0].rescaled.has_value());
  CHECK(limit_model(3, 2) == "bounded");
}
