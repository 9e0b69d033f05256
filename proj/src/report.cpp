#include "toric/report.hpp"

#include <charconv>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace toric {

using nlohmann::json;

namespace {

// Non-finite values have no JSON form; they are written as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json to_json(const DelzantReport& r) {
  json j{{"pass", r.pass}, {"primitive", r.primitive}, {"vertices", json::array()}};
  for (const VertexCheck& v : r.vertices) {
    json e{{"vertex", to_json(v.vertex)}, {"active_facets", v.active}, {"determinant", number(v.determinant)},
           {"ok", v.ok}};
    if (!v.reason.empty()) e["reason"] = v.reason;
    j["vertices"].push_back(std::move(e));
  }
  for (const VertexCheck& v : r.vertices)
    if (!v.ok) {
      j["witness"] = to_json(v.vertex);
      break;
    }
  return j;
}

json to_json(const DiagnosticsRecord& r) {
  return json{{"step", r.step},
              {"t", number(r.t)},
              {"calabi_energy", number(r.calabi_energy)},
              {"sup_F", number(r.sup_F)},
              {"sup_A", number(r.sup_A)},
              {"sup_A_dev", number(r.sup_A_dev)},
              {"sup_grad_A", number(r.sup_grad_A)},
              {"M_hat", number(r.M_hat)},
              {"min_hess_eig", number(r.min_hess_eig)},
              {"dt", number(r.dt)},
              {"accepted", r.accepted},
              {"F_Ln_norm", number(r.F_Ln_norm)},
              {"energy_decay_rate", number(r.energy_decay_rate)},
              {"argmax_F", to_json(r.argmax_F)}};
}

json to_json(const MEstimate& e) {
  return json{{"M_hat", number(e.M_hat)}, {"p", to_json(e.p)},        {"q", to_json(e.q)},
              {"pairs", e.pairs},         {"lines", e.lines},         {"history", e.history},
              {"seed", e.seed}};
}

json to_json(const EstimateReport& r) {
  json pts = json::array();
  for (const Vec& p : r.points) pts.push_back(to_json(p));
  json margins = json::array();
  for (double m : r.margins) margins.push_back(number(m));
  return json{{"lemma", r.lemma},
              {"description", r.description},
              {"lambda", number(r.lambda)},
              {"M", number(r.M)},
              {"tolerance", r.tolerance},
              {"min_margin", number(r.min_margin)},
              {"witness", to_json(r.witness)},
              {"pass", r.pass},
              {"points", std::move(pts)},
              {"margins", std::move(margins)}};
}

json to_json(const RescalingReport& r) {
  return json{{"lambda", number(r.lambda)},
              {"samples", r.samples},
              {"max_F_residual", number(r.max_F_residual)},
              {"max_A_residual", number(r.max_A_residual)},
              {"max_relative", number(r.max_relative)},
              {"M_source", number(r.M_source)},
              {"M_rescaled", number(r.M_rescaled)},
              {"pass", r.pass}};
}

json to_json(const SingularityEvent& e) {
  const int n = static_cast<int>(e.point.size());
  const long long record = e.record == static_cast<std::size_t>(-1) ? -1 : static_cast<long long>(e.record);
  json j{{"record", record},
         {"t", number(e.t)},
         {"point", to_json(e.point)},
         {"lambda", number(e.lambda)},
         {"retained_facets", e.retained_facets},
         {"m", e.m},
         {"classification", e.classification},
         {"limit", limit_model(e.m, n)}};
  if (e.rescaled) j["rescaled_polytope"] = json::parse(polytope_to_json(e.rescaled->polytope));
  return j;
}

void write_jsonl(std::ostream& out, const DiagnosticsRecord& r) { out << to_json(r).dump() << '\n'; }

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_curvature_csv(std::ostream& out, const std::vector<CurvatureReport>& rows) {
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().x.size());
  for (int i = 0; i < n; ++i) out << 'x' << i << ',';
  out << "A,F_norm,det_hessian,min_hessian_eig\n";
  for (const CurvatureReport& c : rows) {
    for (int i = 0; i < n; ++i) out << format_number(c.x(i)) << ',';
    const double mineig = Eigen::SelfAdjointEigenSolver<Mat>(c.hessian, Eigen::EigenvaluesOnly).eigenvalues()(0);
    out << format_number(c.A) << ',' << format_number(c.fnorm) << ',' << format_number(c.detJ) << ','
        << format_number(mineig) << '\n';
  }
}

}  // namespace toric
