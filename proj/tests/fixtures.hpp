#pragma once

#include <cmath>
#include <string>

#include "toric/polytope.hpp"
#include "toric/potential.hpp"

namespace fixtures {

inline const char* kInterval = R"({"dimension":1,"facets":[{"normal":[1],"offset":0},{"normal":[-1],"offset":-1}]})";
inline const char* kSimplex =
    R"({"dimension":2,"facets":[{"normal":[1,0],"offset":0},{"normal":[0,1],"offset":0},{"normal":[-1,-1],"offset":-1}]})";
inline const char* kSquare =
    R"({"dimension":2,"facets":[{"normal":[1,0],"offset":0},{"normal":[0,1],"offset":0},)"
    R"({"normal":[-1,0],"offset":-1},{"normal":[0,-1],"offset":-1}]})";

inline toric::Polytope interval() { return toric::parse_polytope(kInterval); }
inline toric::Polytope simplex() { return toric::parse_polytope(kSimplex); }
inline toric::Polytope square() { return toric::parse_polytope(kSquare); }

inline toric::Vec pt(double a) {
  toric::Vec v(1);
  v << a;
  return v;
}
inline toric::Vec pt(double a, double b) {
  toric::Vec v(2);
  v << a, b;
  return v;
}

/// Guillemin potential plus eps * prod_k l_k^2.
inline toric::SymplecticPotential perturbed(const toric::Polytope& P, double eps, double h = 1.0 / 32.0,
                                            double margin = 1e-6) {
  auto u = toric::SymplecticPotential::guillemin(P, h, margin);
  if (eps == 0.0) return u;
  return u.with_smooth(toric::SmoothPart::sample(u.smooth(), [&](const toric::Vec& x) {
    const Eigen::VectorXd l = toric::facet_values(P, x);
    return eps * l.array().square().prod();
  }));
}

}  // namespace fixtures
