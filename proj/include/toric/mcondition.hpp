#pragma once

#include <cstdint>
#include <vector>

#include "toric/potential.hpp"

namespace toric {

/// V(p,q) = <grad u(q) - grad u(p), nu> with nu the unit vector from p to q.
/// Both points must lie in the margin region.
double v_value(const SymplecticPotential& u, const Vec& p, const Vec& q);

/// The tripled segment [2p - q, 2q - p] lies in the closed polytope.
bool admissible(const Polytope& P, const Vec& p, const Vec& q);

/// Sampling density for estimate_M. Level k puts 3 * 2^(k+1) lattice
/// intervals on every chord and uses anchors * 2^k Halton anchors.
struct MSampling {
  int levels = 4;
  int anchors = 8;
  int random_directions = 4;
  int boundary_steps = 24;  // geometric sequence length at chord ends
  std::uint64_t seed = 0;
};

struct MEstimate {
  double M_hat = 0.0;
  Vec p, q;  // witness pair
  std::size_t pairs = 0;
  std::size_t lines = 0;
  std::vector<double> history;  // cumulative M_hat after each level
  std::uint64_t seed = 0;
};

/// Sampled sup of V over admissible pairs: nested lattices on chords through
/// Halton anchors, vertices and facet centres, in axis, facet-normal and
/// seeded random directions, plus geometric sequences at the chord ends.
MEstimate estimate_M(const SymplecticPotential& u, const MSampling& sampling = {});

}  // namespace toric
