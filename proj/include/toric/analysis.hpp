#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toric/flow.hpp"
#include "toric/potential.hpp"

namespace toric {

/// Dilated problem: lambda * P and x -> lambda * u(x / lambda). The log lambda
/// terms that separate this from the Guillemin potential of lambda * P are
/// affine and go into the affine part.
struct RescaledProblem {
  double lambda = 1.0;
  Polytope polytope;
  SymplecticPotential potential;
  Vec source_point;  // blow-up point in the original coordinates, if any
  double time = 0.0;
};

RescaledProblem rescale(const SymplecticPotential& u, double lambda);

struct RescalingReport {
  double lambda = 1.0;
  std::size_t samples = 0;
  double max_F_residual = 0.0;  // max ||F~|(lambda p) - |F|(p) / lambda|
  double max_A_residual = 0.0;
  double max_relative = 0.0;    // residual / (1 + |F|(p) / lambda), worst of both
  double M_source = 0.0;
  double M_rescaled = 0.0;
  bool pass = false;            // max_relative <= 1e-8
};

/// Curvature covariance at the given points of P (margin region), plus M-hat
/// of both potentials with the same sampling.
RescalingReport verify_rescaling(const SymplecticPotential& u, double lambda, const std::vector<Vec>& samples,
                                 const MSampling& sampling = {});

inline constexpr std::array<std::string_view, 9> kLemmaIds = {
    "LENGTH_BOUND", "DIST_CORNER", "CURV_INEQ",  "HESS_UPPER",     "SINH_MONO",
    "SINH_SQ",      "DEFINING_BOUND", "HESS_RATIO", "ELLIPTIC_BALLS"};

bool is_lemma_id(std::string_view id);

struct EstimateParams {
  double tolerance = 1e-6;
  double M = 0.0;           // <= 0: estimate_M with `sampling`
  MSampling sampling;
  double grid_h = 1.0 / 32.0;  // grid for sup|F| and min Hessian eigenvalue
  int directions = 4;       // random directions per sample
  std::uint64_t seed = 0;
};

/// One inequality per entry: margin = RHS - LHS.
struct EstimateReport {
  std::string lemma;
  std::string description;
  double lambda = 1.0;  // rescaling applied so that sup|F| <= 1, 1 if none
  double M = 0.0;       // 0 for lemmas that do not use it
  double tolerance = 1e-6;
  std::vector<Vec> points;  // sample points, original coordinates
  std::vector<double> margins;
  double min_margin = 0.0;
  Vec witness;
  bool pass = false;  // min_margin >= -tolerance
};

/// Halton points of P with min_k l_k >= min_l.
std::vector<Vec> interior_samples(const Polytope& P, int count, double min_l, std::uint64_t seed = 0);

/// Checks one lemma at the sample points (original coordinates; defaults to
/// 12 Halton points when empty). Throws ParseError for an unknown id and
/// DomainError when the hypotheses cannot be arranged at a sample.
EstimateReport verify_estimate(const SymplecticPotential& u, std::string_view lemma, std::vector<Vec> samples = {},
                               const EstimateParams& params = {});

/// Max |F| and min Hessian eigenvalue over a grid of spacing h.
struct GridExtremes {
  double sup_F = 0.0;
  Vec argmax_F;
  double min_hess_eig = 0.0;
};

GridExtremes grid_extremes(const SymplecticPotential& u, double h);

struct SingularityThresholds {
  double sup_F = 1e3;
  double retention = 10.0;  // facet kept in the limit when lambda * dist < retention
};

struct SingularityEvent {
  std::size_t record = 0;  // index into FlowRun::records, npos for the initial state
  double t = 0.0;
  Vec point;
  double lambda = 0.0;  // |F| at point
  std::vector<int> retained_facets;
  int m = 0;
  std::string classification;  // "interior" or "boundary"
  std::optional<RescaledProblem> rescaled;
};

/// Records (the initial one included) whose sup|F| exceeds the threshold,
/// with the blow-up limit type. Rescaled problems are attached where the run
/// kept a snapshot.
std::vector<SingularityEvent> detect_singularity(const FlowRun& run, const SingularityThresholds& thresholds = {});

/// "R^n" or "(R+)^m x R^(n-m)"; "bounded" when more than n facets stay at
/// finite distance (the threshold was too low for a blow-up).
std::string limit_model(int m, int n);

}  // namespace toric
