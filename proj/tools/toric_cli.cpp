// toric: command-line front end for the toric Kähler engine.
//
// Exit status: 0 success, 1 domain failure (Delzant check, lemma failure,
// singular or stiff flow), 2 usage or parse error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "toric/analysis.hpp"
#include "toric/flow.hpp"
#include "toric/geometry.hpp"
#include "toric/mcondition.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/report.hpp"
#include "toric/spline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toric;

namespace {

struct Options {
  std::string polytope;
  std::string config;
  std::string out;
  std::string checkpoint;
  std::string points;
  std::string lemmas;
  std::uint64_t seed = 0;
  double grid_h = 0.0;  // 0: command default
  double margin = -1.0;  // negative: command default
  double lambda = 1.0;
  int density = 4;
  bool flat = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double diameter(const Polytope& P) {
  double d = 0.0;
  for (int i = 0; i < P.dim(); ++i) d = std::max(d, P.box_hi()(i) - P.box_lo()(i));
  return d;
}

double grid_h_or(const Options& o, double fallback) { return o.grid_h > 0.0 ? o.grid_h : fallback; }

double margin_or(const Options& o, const Polytope& P) { return o.margin >= 0.0 ? o.margin : 1e-6 * diameter(P); }

SymplecticPotential load_potential(const Polytope& P, const Options& o) {
  const double h = grid_h_or(o, 1.0 / 32.0);
  const double margin = margin_or(o, P);
  if (o.flat) return SymplecticPotential::flat(P, h, margin);
  if (!o.checkpoint.empty()) return SymplecticPotential(P, load_checkpoint(o.checkpoint), margin);
  return SymplecticPotential::guillemin(P, h, margin);
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  fs::create_directories(o.out);
  return fs::path(o.out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write " + path.string());
  f << text;
}

std::vector<Vec> read_points(const std::string& path, int n) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(std::string("points file: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("points file: expected an array of points");
  std::vector<Vec> pts;
  for (const json& p : j) {
    if (!p.is_array() || static_cast<int>(p.size()) != n) throw ParseError("points file: each point needs " + std::to_string(n) + " coordinates");
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      if (!p[static_cast<std::size_t>(i)].is_number()) throw ParseError("points file: coordinates must be numbers");
      x(i) = p[static_cast<std::size_t>(i)].get<double>();
    }
    pts.push_back(x);
  }
  return pts;
}

int cmd_check(const Options& o) {
  const Polytope P = load_polytope(o.polytope);
  const DelzantReport r = delzant_check(P);
  std::cout << to_json(r).dump(2) << '\n';
  return r.pass ? 0 : 1;
}

int cmd_curvature(const Options& o) {
  const Polytope P = load_polytope(o.polytope);
  const SymplecticPotential u = load_potential(P, o);
  std::vector<Vec> pts;
  if (!o.points.empty()) {
    pts = read_points(o.points, P.dim());
  } else {
    const double h = grid_h_or(o, 1.0 / 16.0);
    pts = build_grid(P, h, std::max(u.margin(), 0.0)).points;
  }
  std::vector<CurvatureReport> rows;
  for (const Vec& x : pts) rows.push_back(curvature_at(u, x));
  if (o.out.empty()) {
    write_curvature_csv(std::cout, rows);
  } else {
    std::ofstream f(out_dir(o) / "curvature.csv", std::ios::binary);
    write_curvature_csv(f, rows);
  }
  return 0;
}

std::string checkpoint_name(long step) {
  std::ostringstream name;
  name << "checkpoint_" << std::setw(8) << std::setfill('0') << step << ".ckpt";
  return name.str();
}

int cmd_flow(const Options& o) {
  const Polytope P = load_polytope(o.polytope);
  FlowConfig config = o.config.empty() ? FlowConfig{} : load_flow_config(o.config);
  if (o.grid_h > 0.0) config.grid_h = o.grid_h;
  if (o.margin >= 0.0) config.margin_delta = o.margin;
  const fs::path dir = out_dir(o);

  FlowState state = o.checkpoint.empty()
                        ? initial_state(P, config)
                        : make_state(SymplecticPotential(P, load_checkpoint(o.checkpoint), config.margin()), config);

  std::ofstream jsonl(dir / "diagnostics.jsonl", std::ios::binary);
  if (!jsonl) throw DomainError("cannot write " + (dir / "diagnostics.jsonl").string());
  const FlowRun run = toric::run(std::move(state), config, [&](const FlowState& s, const DiagnosticsRecord& rec) {
    write_jsonl(jsonl, rec);
    if (config.checkpoint_every > 0 && s.steps % config.checkpoint_every == 0)
      save_checkpoint((dir / checkpoint_name(s.steps)).string(), s.u.smooth());
  });
  jsonl.close();
  save_checkpoint((dir / "final.ckpt").string(), run.final_state.u.smooth());

  json status{{"reason", run.reason},
              {"steps", run.final_state.steps},
              {"t", run.final_state.t},
              {"calabi_energy", run.final_state.energy},
              {"initial", to_json(run.initial)},
              {"events", json::array()}};
  if (run.reason == "singularity") {
    SingularityThresholds th;
    th.sup_F = config.sup_F_threshold;
    for (const SingularityEvent& e : detect_singularity(run, th)) status["events"].push_back(to_json(e));
  }
  write_text(dir / "status.json", status.dump(2) + "\n");
  std::cout << status.dump(2) << '\n';
  return run.reason == "singularity" || run.reason == "stiffness failure" ? 1 : 0;
}

int cmd_verify(const Options& o) {
  std::vector<std::string> ids;
  if (o.lemmas.empty() || o.lemmas == "all") {
    for (auto id : kLemmaIds) ids.emplace_back(id);
  } else {
    std::stringstream ss(o.lemmas);
    std::string id;
    while (std::getline(ss, id, ','))
      if (!id.empty()) ids.push_back(id);
  }
  for (const std::string& id : ids)
    if (!is_lemma_id(id)) throw UsageError("unknown lemma id '" + id + "'");

  const Polytope P = load_polytope(o.polytope);
  const SymplecticPotential u = load_potential(P, o);
  EstimateParams params;
  params.seed = o.seed;
  params.sampling.seed = o.seed;
  std::vector<Vec> samples;
  if (!o.points.empty()) samples = read_points(o.points, P.dim());

  json doc{{"seed", o.seed}, {"reports", json::array()}};
  bool all = true;
  for (const std::string& id : ids) {
    const EstimateReport r = verify_estimate(u, id, samples, params);
    all = all && r.pass;
    doc["reports"].push_back(to_json(r));
  }
  doc["pass"] = all;
  if (!o.out.empty()) write_text(out_dir(o) / "verify.json", doc.dump(2) + "\n");
  std::cout << doc.dump(2) << '\n';
  return all ? 0 : 1;
}

int cmd_mcond(const Options& o) {
  const Polytope P = load_polytope(o.polytope);
  const SymplecticPotential u = load_potential(P, o);
  MSampling s;
  s.levels = o.density;
  s.seed = o.seed;
  const json doc = to_json(estimate_M(u, s));
  if (!o.out.empty()) write_text(out_dir(o) / "mcond.json", doc.dump(2) + "\n");
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_rescale(const Options& o) {
  if (!(o.lambda > 0.0)) throw UsageError("--lambda must be positive");
  const Polytope P = load_polytope(o.polytope);
  const SymplecticPotential u = load_potential(P, o);
  const RescaledProblem r = rescale(u, o.lambda);
  const fs::path dir = out_dir(o);
  write_text(dir / "polytope.json", polytope_to_json(r.polytope));
  save_checkpoint((dir / "potential.ckpt").string(), r.potential.folded_smooth());
  json doc{{"lambda", o.lambda},
           {"polytope", (dir / "polytope.json").string()},
           {"checkpoint", (dir / "potential.ckpt").string()}};
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric Kähler geometry and Calabi flow"};
  app.require_subcommand(1);
  Options o;

  auto add_polytope = [&](CLI::App* sub) { sub->add_option("--polytope", o.polytope, "polytope JSON")->required(); };
  auto add_potential = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", o.checkpoint, "smooth part f (default: Guillemin potential, f = 0)");
    sub->add_flag("--flat", o.flat, "test mode potential 1/2 |x|^2 without the boundary terms");
    sub->add_option("--grid-h", o.grid_h, "spline / sample grid spacing");
    sub->add_option("--margin", o.margin, "margin delta");
  };

  auto* check = app.add_subcommand("check", "Delzant check of a polytope");
  add_polytope(check);

  auto* curvature = app.add_subcommand("curvature", "curvature CSV on a grid or at given points");
  add_polytope(curvature);
  add_potential(curvature);
  curvature->add_option("--points", o.points, "JSON array of points");
  curvature->add_option("--out", o.out, "output directory (default: stdout)");

  auto* flow = app.add_subcommand("flow", "run the Calabi flow");
  add_polytope(flow);
  flow->add_option("--config", o.config, "flow config JSON");
  flow->add_option("--checkpoint", o.checkpoint, "initial smooth part f");
  flow->add_option("--grid-h", o.grid_h, "override grid_h");
  flow->add_option("--margin", o.margin, "override margin_delta");
  flow->add_option("--out", o.out, "output directory")->required();
  flow->add_option("--seed", o.seed, "sampling seed");

  auto* verify = app.add_subcommand("verify", "check the geometric estimates");
  add_polytope(verify);
  add_potential(verify);
  verify->add_option("--lemmas", o.lemmas, "comma separated lemma ids (default: all)");
  verify->add_option("--points", o.points, "JSON array of sample points");
  verify->add_option("--seed", o.seed, "sampling seed");
  verify->add_option("--out", o.out, "output directory");

  auto* mcond = app.add_subcommand("mcond", "estimate the M-condition constant");
  add_polytope(mcond);
  add_potential(mcond);
  mcond->add_option("--density", o.density, "sampling levels")->check(CLI::Range(1, 8));
  mcond->add_option("--seed", o.seed, "sampling seed");
  mcond->add_option("--out", o.out, "output directory");

  auto* resc = app.add_subcommand("rescale", "dilate polytope and potential by lambda");
  add_polytope(resc);
  add_potential(resc);
  resc->add_option("--lambda", o.lambda, "dilation factor")->required();
  resc->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(o);
    if (*curvature) return cmd_curvature(o);
    if (*flow) return cmd_flow(o);
    if (*verify) return cmd_verify(o);
    if (*mcond) return cmd_mcond(o);
    if (*resc) return cmd_rescale(o);
  } catch (const UsageError& e) {
    std::cerr << "toric: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "toric: " << e.what() << '\n';
    return 2;
  } catch (const InvalidPolytope& e) {
    std::cerr << "toric: invalid polytope: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "toric: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
