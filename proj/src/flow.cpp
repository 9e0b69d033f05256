#include "toric/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <json.hpp>

namespace toric {

struct NodeExtension {
  std::vector<std::size_t> exterior, interior;
  Eigen::SparseMatrix<double> coupling;  // R_e^T R_a
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  NodeExtension(const Polytope& P, const SmoothPart& f, const std::vector<char>& active) {
    const int n = f.dim();
    const std::size_t N = f.node_count();
    std::vector<long> slot(N, -1);
    for (std::size_t i = 0; i < N; ++i) {
      auto& list = active[i] ? interior : exterior;
      slot[i] = static_cast<long>(list.size());
      list.push_back(i);
    }
    if (exterior.empty()) return;

    std::vector<CellIndex> dirs;
    for (int a = 0; a < n; ++a) {
      CellIndex d{};
      d[static_cast<std::size_t>(a)] = 1;
      dirs.push_back(d);
    }
    for (int k = 0; k < P.facet_count(); ++k) {
      CellIndex d{};
      int nonzero = 0;
      bool lattice = true;
      for (int a = 0; a < n; ++a) {
        const double c = P.normal(k)(a);
        if (std::abs(c - std::round(c)) > 1e-9) lattice = false;
        d[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(c));
        if (d[static_cast<std::size_t>(a)] != 0) ++nonzero;
      }
      if (!lattice || nonzero < 2) continue;
      // Normalise the sign so that d and -d count once.
      for (int a = 0; a < n; ++a)
        if (d[static_cast<std::size_t>(a)] != 0) {
          if (d[static_cast<std::size_t>(a)] < 0)
            for (int& c : d) c = -c;
          break;
        }
      if (std::find(dirs.begin(), dirs.end(), d) == dirs.end()) dirs.push_back(d);
    }

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> te, ta;
    long row = 0;
    auto add_stencil = [&](std::size_t i0, const CellIndex& d, const double* c, int len, double weight) {
      const CellIndex start = f.node_index(i0);
      std::array<std::size_t, 5> nodes{};
      bool touches = false;
      for (int s = 0; s < len; ++s) {
        CellIndex j = start;
        for (int a = 0; a < n; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          j[ua] += s * d[ua];
          if (j[ua] < 0 || j[ua] >= f.shape()[ua]) return;
        }
        nodes[static_cast<std::size_t>(s)] = f.flat_index(j);
        if (!active[nodes[static_cast<std::size_t>(s)]]) touches = true;
      }
      if (!touches) return;
      for (int s = 0; s < len; ++s) {
        const std::size_t j = nodes[static_cast<std::size_t>(s)];
        (active[j] ? ta : te).emplace_back(row, slot[j], weight * c[s]);
      }
      ++row;
    };
    static constexpr double kFourth[5] = {1, -4, 6, -4, 1};
    static constexpr double kFirst[2] = {-1, 1};
    constexpr double kTie = 1e-4;  // small membrane term that pins directions the stencils miss
    for (std::size_t i = 0; i < N; ++i)
      for (const CellIndex& d : dirs) {
        add_stencil(i, d, kFourth, 5, 1.0);
        add_stencil(i, d, kFirst, 2, kTie);
      }

    Eigen::SparseMatrix<double> Re(row, static_cast<long>(exterior.size())), Ra(row, static_cast<long>(interior.size()));
    Re.setFromTriplets(te.begin(), te.end());
    Ra.setFromTriplets(ta.begin(), ta.end());
    const Eigen::SparseMatrix<double> normal = Re.transpose() * Re;
    coupling = Re.transpose() * Ra;
    solver.compute(normal);
    if (solver.info() != Eigen::Success) throw DomainError("node extension: singular system");
  }

  void apply(std::vector<double>& v) const {
    if (exterior.empty()) return;
    Eigen::VectorXd va(static_cast<long>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) va(static_cast<long>(k)) = v[interior[k]];
    const Eigen::VectorXd ve = solver.solve(-(coupling * va));
    for (std::size_t k = 0; k < exterior.size(); ++k) v[exterior[k]] = ve(static_cast<long>(k));
  }
};

namespace {

using nlohmann::json;

// Right-hand side Abar - A on every node.
std::vector<double> update_field(const SymplecticPotential& u, const NodeMask& mask, double A_bar) {
  std::vector<double> A = scalar_curvature_nodes(u, mask);
  for (double& a : A) a = A_bar - a;
  return A;
}

bool all_unit_weights(const SymplecticPotential& u) { return (u.weights().array() == 1.0).all(); }

SmoothPart a_field_spline(const SymplecticPotential& u, const NodeMask& mask) {
  return u.smooth().with_values(scalar_curvature_nodes(u, mask));
}

MEstimate flow_M(const SymplecticPotential& u) {
  MSampling s;
  s.levels = 2;
  s.anchors = 4;
  s.random_directions = 2;
  return estimate_M(u, s);
}

}  // namespace

FlowConfig parse_flow_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("flow config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("flow config: expected an object");
  FlowConfig c;
  for (const auto& [key, val] : j.items()) {
    auto num = [&]() {
      if (!val.is_number()) throw ParseError("flow config: '" + key + "' must be a number");
      return val.get<double>();
    };
    auto integer = [&]() {
      if (!val.is_number_integer()) throw ParseError("flow config: '" + key + "' must be an integer");
      return val.get<long>();
    };
    if (key == "grid_h") c.grid_h = num();
    else if (key == "margin_delta") c.margin_delta = num();
    else if (key == "t_end") c.t_end = num();
    else if (key == "dt_init") c.dt_init = num();
    else if (key == "sup_F_threshold") c.sup_F_threshold = num();
    else if (key == "convergence_tol") c.convergence_tol = num();
    else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(integer());
    else if (key == "perturbation_amplitude") c.perturbation_amplitude = num();
    else if (key == "stages") c.stages = static_cast<int>(integer());
    else if (key == "mcond_every") c.mcond_every = static_cast<int>(integer());
    else if (key == "stability_every") c.stability_every = static_cast<int>(integer());
    else if (key == "max_steps") c.max_steps = integer();
    else throw ParseError("flow config: unknown key '" + key + "'");
  }
  if (!(c.grid_h > 0.0)) throw ParseError("flow config: grid_h must be positive");
  if (c.margin_delta < 0.0) throw ParseError("flow config: margin_delta must be nonnegative");
  if (!(c.t_end >= 0.0)) throw ParseError("flow config: t_end must be nonnegative");
  if (!(c.dt_init > 0.0)) throw ParseError("flow config: dt_init must be positive");
  if (c.stages < 1) throw ParseError("flow config: stages must be at least 1");
  if (c.checkpoint_every < 0 || c.mcond_every < 0 || c.stability_every < 1 || c.max_steps < 0)
    throw ParseError("flow config: step counts out of range");
  return c;
}

FlowConfig load_flow_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open flow config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_flow_config(ss.str());
}

NodeMask node_mask(const SymplecticPotential& u, double margin) {
  NodeMask m;
  const SmoothPart& f = u.smooth();
  m.active.assign(f.node_count(), 0);
  for (std::size_t i = 0; i < f.node_count(); ++i)
    if (min_facet_value(u.polytope(), f.node(i)) >= margin - 1e-12 * (1.0 + margin)) {
      m.active[i] = 1;
      ++m.count;
    }
  if (m.count == 0) throw DomainError("no spline nodes inside the margin region");

  m.extension = std::make_shared<const NodeExtension>(u.polytope(), f, m.active);
  return m;
}

void extend_field(const NodeMask& mask, std::vector<double>& v) { mask.extension->apply(v); }

double average_A(const SymplecticPotential& u, const QuadratureGrid& grid) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double A = curvature_from_bundle(u.derivatives_interior(grid.points[i], 4)).A;
    num += grid.weights[i] * A;
    den += grid.weights[i];
  }
  if (den <= 0.0) throw DomainError("average_A: empty grid");
  return num / den;
}

double average_A_boundary(const Polytope& P) { return 2.0 * P.boundary_measure() / P.volume(); }

double calabi_energy(const SymplecticPotential& u, const QuadratureGrid& grid, double A_bar) {
  double e = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double A = curvature_from_bundle(u.derivatives_interior(grid.points[i], 4)).A;
    e += grid.weights[i] * (A - A_bar) * (A - A_bar);
  }
  return e;
}

std::vector<double> scalar_curvature_nodes(const SymplecticPotential& u, const NodeMask& mask) {
  const SmoothPart& f = u.smooth();
  std::vector<double> A(f.node_count(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    if (mask.active[i]) A[i] = curvature_from_bundle(u.derivatives_interior(f.node(i), 4)).A;
  extend_field(mask, A);
  return A;
}

double energy_decay_rate(const SymplecticPotential& u, const QuadratureGrid& grid, const NodeMask& mask) {
  for (int d = 0; d < u.dim(); ++d)
    if (u.smooth().shape()[static_cast<std::size_t>(d)] < 5)
      throw DomainError("energy_decay_rate: grid too coarse");
  const SmoothPart Aspl = a_field_spline(u, mask);
  double rate = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec& x = grid.points[i];
    const Mat AH = Aspl.derivatives(x, 2).hessian;
    const Mat H = u.derivatives_interior(x, 2).hessian;
    const Mat G = H.llt().solve(Mat::Identity(u.dim(), u.dim()));
    const Mat M = AH * G;
    rate += grid.weights[i] * (M * M).trace();
  }
  return -2.0 * rate;
}

FlowState make_state(const SymplecticPotential& u, const FlowConfig& config) {
  FlowState s;
  const double margin = config.margin();
  s.u = u.with_margin(margin);
  s.grid = build_grid(u.polytope(), config.grid_h, margin);
  s.quad = build_grid(u.polytope(), config.grid_h, 0.0);
  s.nodes = node_mask(s.u, margin);
  std::vector<double> v = s.u.smooth().values();
  extend_field(s.nodes, v);
  s.u = s.u.with_smooth(s.u.smooth().with_values(std::move(v)));
  s.A_bar = all_unit_weights(s.u) ? average_A_boundary(u.polytope()) : average_A(s.u, s.quad);
  s.energy = calabi_energy(s.u, s.quad, s.A_bar);
  s.dt = config.dt_init;
  return s;
}

FlowState initial_state(const Polytope& P, const FlowConfig& config) {
  SymplecticPotential u = SymplecticPotential::guillemin(P, config.grid_h, config.margin());
  if (config.perturbation_amplitude != 0.0) {
    const double a = config.perturbation_amplitude;
    u = u.with_smooth(SmoothPart::sample(u.smooth(), [&](const Vec& x) {
      const Eigen::VectorXd l = facet_values(P, x);
      return a * l.array().square().prod();
    }));
  }
  return make_state(u, config);
}

double spectral_radius(const FlowState& state, int iterations) {
  const SmoothPart& f = state.u.smooth();
  const std::vector<double> base = update_field(state.u, state.nodes, state.A_bar);
  const std::size_t N = f.node_count();
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::vector<double> v(N);
  for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  double lambda = 0.0;
  constexpr double eps = 1e-7;
  for (int it = 0; it < iterations; ++it) {
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    if (vmax == 0.0) break;
    std::vector<double> probe(f.values());
    for (std::size_t i = 0; i < N; ++i) probe[i] += eps * v[i] / vmax;
    extend_field(state.nodes, probe);
    const std::vector<double> moved = update_field(state.u.with_smooth(f.with_values(probe)), state.nodes, state.A_bar);
    double jmax = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = (moved[i] - base[i]) / eps;
      jmax = std::max(jmax, std::abs(v[i]));
    }
    lambda = jmax;
  }
  return lambda;
}

StepResult step(const FlowState& state, double dt, int stages) {
  StepResult res;
  res.state = state;
  const SmoothPart& f = state.u.smooth();
  const std::size_t N = f.node_count();
  const int s = std::max(1, stages);
  const double w1 = 2.0 / (static_cast<double>(s) * s + s);
  try {
    auto L = [&](const std::vector<double>& vals) {
      return update_field(state.u.with_smooth(f.with_values(vals)), state.nodes, state.A_bar);
    };
    std::vector<double> y0 = f.values();
    std::vector<double> y1(N);
    {
      const std::vector<double> k = L(y0);
      for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + w1 * dt * k[i];
      extend_field(state.nodes, y1);
    }
    for (int j = 2; j <= s; ++j) {
      const double mu = (2.0 * j - 1.0) / j, nu = -(j - 1.0) / j;
      const std::vector<double> k = L(y1);
      std::vector<double> y2(N);
      for (std::size_t i = 0; i < N; ++i) y2[i] = mu * y1[i] + nu * y0[i] + mu * w1 * dt * k[i];
      extend_field(state.nodes, y2);
      y0.swap(y1);
      y1.swap(y2);
    }
    for (double x : y1)
      if (!std::isfinite(x)) {
        res.reason = "non-finite update";
        return res;
      }
    FlowState next = state;
    next.u = state.u.with_smooth(f.with_values(std::move(y1)));
    next.energy = calabi_energy(next.u, next.quad, next.A_bar);
    if (!std::isfinite(next.energy)) {
      res.reason = "non-finite energy";
      return res;
    }
    if (next.energy > state.energy + 1e-12) {
      res.reason = "energy increased";
      return res;
    }
    next.t = state.t + dt;
    next.dt = dt;
    next.steps = state.steps + 1;
    res.state = std::move(next);
    res.accepted = true;
  } catch (const DomainError&) {
    res.reason = "convexity lost";
  }
  return res;
}

DiagnosticsRecord diagnostics(const FlowState& state, bool with_rate) {
  DiagnosticsRecord r;
  r.step = state.steps;
  r.t = state.t;
  r.dt = state.dt;
  r.calabi_energy = state.energy;
  const int n = state.u.dim();
  const SmoothPart Aspl = a_field_spline(state.u, state.nodes);
  double ln = 0.0;
  r.min_hess_eig = std::numeric_limits<double>::infinity();
  r.sup_F = -1.0;
  for (std::size_t i = 0; i < state.grid.size(); ++i) {
    const Vec& x = state.grid.points[i];
    const Derivatives d = state.u.derivatives_interior(x, 4);
    const CurvatureReport c = curvature_from_bundle(d);
    if (c.fnorm > r.sup_F) {
      r.sup_F = c.fnorm;
      r.argmax_F = x;
    }
    r.sup_A = std::max(r.sup_A, std::abs(c.A));
    r.sup_A_dev = std::max(r.sup_A_dev, std::abs(c.A - state.A_bar));
    r.sup_grad_A = std::max(r.sup_grad_A, Aspl.derivatives(x, 1).gradient.norm());
    r.min_hess_eig = std::min(
        r.min_hess_eig, Eigen::SelfAdjointEigenSolver<Mat>(d.hessian, Eigen::EigenvaluesOnly).eigenvalues()(0));
    ln += state.grid.weights[i] * std::pow(c.fnorm, n);
  }
  r.F_Ln_norm = std::pow(ln, 1.0 / n);
  if (with_rate) r.energy_decay_rate = energy_decay_rate(state.u, state.quad, state.nodes);
  return r;
}

FlowRun run(FlowState state, const FlowConfig& config, const FlowObserver& observer) {
  FlowRun out;
  out.initial = diagnostics(state);
  out.initial.M_hat = flow_M(state.u).M_hat;
  double last_M = out.initial.M_hat;

  auto finish = [&](const DiagnosticsRecord& rec, std::size_t index) {
    if (rec.sup_F > config.sup_F_threshold) {
      out.reason = "singularity";
      out.snapshots.push_back({index, state.u});
      return true;
    }
    // t_end = 0 reports "time reached" even for a converged start.
    if (config.t_end == 0.0) {
      out.reason = "time reached";
      return true;
    }
    if (rec.sup_A_dev < config.convergence_tol) {
      out.reason = "converged";
      return true;
    }
    if (state.t >= config.t_end * (1.0 - 1e-14)) {
      out.reason = "time reached";
      return true;
    }
    return false;
  };

  if (finish(out.initial, static_cast<std::size_t>(-1))) {
    out.final_state = std::move(state);
    return out;
  }

  const int s = config.stages;
  const double stab = static_cast<double>(s) * s + s;
  state.lambda_max = spectral_radius(state);
  double dt = config.dt_init;
  while (true) {
    if (state.steps >= config.max_steps) {
      out.reason = "step limit";
      break;
    }
    const double cap = state.lambda_max > 0.0 ? 0.8 * stab / state.lambda_max : dt;
    const double remaining = config.t_end - state.t;
    const double dt_try = std::min({dt, cap, remaining});
    StepResult res = step(state, dt_try, s);
    if (!res.accepted) {
      dt = 0.5 * dt_try;
      if (dt < 1e-14) {
        out.reason = "stiffness failure";
        break;
      }
      continue;
    }
    const double lambda = state.lambda_max;
    state = std::move(res.state);
    state.lambda_max = lambda;
    if (dt_try >= remaining) state.t = config.t_end;
    DiagnosticsRecord rec = diagnostics(state);
    rec.dt = dt_try;
    if (config.mcond_every > 0 && state.steps % config.mcond_every == 0) last_M = flow_M(state.u).M_hat;
    rec.M_hat = last_M;
    out.records.push_back(rec);
    if (observer) observer(state, rec);
    dt = std::min(1.25 * dt_try, cap);
    if (state.steps % config.stability_every == 0) state.lambda_max = spectral_radius(state);
    if (finish(rec, out.records.size() - 1)) break;
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace toric
