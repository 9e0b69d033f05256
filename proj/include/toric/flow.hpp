#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toric/geometry.hpp"
#include "toric/mcondition.hpp"
#include "toric/potential.hpp"

namespace toric {

/// Flow parameters. JSON keys have the same names.
struct FlowConfig {
  double grid_h = 1.0 / 32.0;
  double margin_delta = 0.0;  // 0: use grid_h
  double t_end = 1.0;
  double dt_init = 1e-6;
  double sup_F_threshold = 1e3;
  double convergence_tol = 0.05;
  int checkpoint_every = 0;
  double perturbation_amplitude = 0.0;  // f0 = a * prod_k l_k^2
  int stages = 16;                      // Runge-Kutta-Legendre stages; 1 is forward Euler
  int mcond_every = 100;                // accepted steps between M estimates, 0: initial only
  int stability_every = 100;            // accepted steps between spectral radius estimates
  long max_steps = 1000000;

  double margin() const { return margin_delta > 0.0 ? margin_delta : grid_h; }
};

FlowConfig parse_flow_config(std::string_view json_text);
FlowConfig load_flow_config(const std::string& path);

struct DiagnosticsRecord {
  long step = 0;
  double t = 0.0;
  double calabi_energy = 0.0;
  double sup_F = 0.0;
  double sup_A = 0.0;
  double sup_A_dev = 0.0;  // sup |A - Abar|
  double sup_grad_A = 0.0;
  double M_hat = 0.0;
  double min_hess_eig = 0.0;
  double dt = 0.0;
  bool accepted = true;
  double F_Ln_norm = 0.0;
  double energy_decay_rate = 0.0;
  Vec argmax_F;
};

struct NodeExtension;

/// Spline nodes updated by the flow: those with min_k l_k >= margin. The
/// remaining values are the smoothest continuation of the active ones, in the
/// sense of least squares fourth differences along the axes and along facet
/// normals that are lattice vectors.
struct NodeMask {
  std::vector<char> active;
  std::size_t count = 0;
  std::shared_ptr<const NodeExtension> extension;
};

/// Overwrites the inactive entries of a node field with their continuation.
void extend_field(const NodeMask& mask, std::vector<double>& v);

NodeMask node_mask(const SymplecticPotential& u, double margin);

struct FlowState {
  double t = 0.0;
  SymplecticPotential u;
  double A_bar = 0.0;
  QuadratureGrid grid;  // points with min_k l_k >= margin: sup diagnostics
  QuadratureGrid quad;  // all cell midpoints inside P: energy and averages
  NodeMask nodes;
  double dt = 0.0;
  double energy = 0.0;
  double lambda_max = 0.0;  // spectral radius estimate of the linearised update
  long steps = 0;
};

/// Quadrature average of A over the grid.
double average_A(const SymplecticPotential& u, const QuadratureGrid& grid);
/// 2 sigma(dP) / Vol(P).
double average_A_boundary(const Polytope& P);

double calabi_energy(const SymplecticPotential& u, const QuadratureGrid& grid, double A_bar);

/// A at the active spline nodes, extended to the others by extend_field.
std::vector<double> scalar_curvature_nodes(const SymplecticPotential& u, const NodeMask& mask);

/// -2 int A_ij u^ia A_ab u^bj dmu, with A_ij from a spline of the node A field.
double energy_decay_rate(const SymplecticPotential& u, const QuadratureGrid& grid, const NodeMask& mask);

/// Initial state: Guillemin potential plus the configured perturbation.
FlowState initial_state(const Polytope& P, const FlowConfig& config);
/// State around a given potential (its margin is replaced by the config's).
FlowState make_state(const SymplecticPotential& u, const FlowConfig& config);

/// Largest |eigenvalue| of the linearised update f -> Abar - A(u0 + f).
double spectral_radius(const FlowState& state, int iterations = 40);

struct StepResult {
  FlowState state;
  bool accepted = false;
  std::string reason;  // why a step was rejected
};

/// One Runge-Kutta-Legendre step of size dt for df/dt = Abar - A. Accepted when
/// the Hessian stays positive definite and the energy does not increase by
/// more than 1e-12. Does not retry.
StepResult step(const FlowState& state, double dt, int stages = 1);

DiagnosticsRecord diagnostics(const FlowState& state, bool with_rate = true);

struct FlowSnapshot {
  std::size_t record = 0;  // index into FlowRun::records, or npos for the initial state
  SymplecticPotential u;
};

struct FlowRun {
  DiagnosticsRecord initial;
  std::vector<DiagnosticsRecord> records;  // one per accepted step
  std::string reason;  // "converged", "time reached", "singularity", "stiffness failure", "step limit"
  FlowState final_state;
  std::vector<FlowSnapshot> snapshots;  // states where sup|F| exceeded the threshold
};

using FlowObserver = std::function<void(const FlowState&, const DiagnosticsRecord&)>;

FlowRun run(FlowState state, const FlowConfig& config, const FlowObserver& observer = {});

}  // namespace toric
