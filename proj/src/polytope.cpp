#include "toric/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace toric {

namespace {

// Vertices violating another inequality by more than this are discarded.
constexpr double kVertexTol = 1e-9;

long long lattice_gcd(const Eigen::VectorXi& v) {
  long long g = 0;
  for (int i = 0; i < v.size(); ++i) g = std::gcd(g, static_cast<long long>(std::abs(v(i))));
  return g;
}

// Calls fn(subset) for every increasing k-subset of {0..n-1}.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& N, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), N.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = N.row(rows[r]);
  return out;
}

// Euclidean d-volume of the face cut out by the facets in `on` (d = n - |on|),
// by the pyramid decomposition from the centre of the face. Valid for simple
// polytopes, where every nonempty intersection of k facets has codimension k.
double face_volume(const Polytope& P, const std::vector<int>& on) {
  const int n = P.dim();
  const int d = n - static_cast<int>(on.size());
  std::vector<int> verts;
  for (std::size_t v = 0; v < P.vertices().size(); ++v) {
    const auto& act = P.active_facets()[v];
    if (std::all_of(on.begin(), on.end(),
                    [&](int s) { return std::find(act.begin(), act.end(), s) != act.end(); }))
      verts.push_back(static_cast<int>(v));
  }
  if (verts.empty()) return 0.0;
  if (d == 0) return 1.0;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int v : verts) c += P.vertices()[static_cast<std::size_t>(v)];
  c /= static_cast<double>(verts.size());

  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
  if (!on.empty()) {
    const Eigen::MatrixXd N = rows_of(P.normals(), on);
    proj -= N.transpose() * (N * N.transpose()).ldlt().solve(N);
  }

  std::map<std::vector<int>, int> seen;
  double total = 0.0;
  for (int m = 0; m < P.facet_count(); ++m) {
    if (std::find(on.begin(), on.end(), m) != on.end()) continue;
    std::vector<int> sub;
    for (int v : verts) {
      const auto& act = P.active_facets()[static_cast<std::size_t>(v)];
      if (std::find(act.begin(), act.end(), m) != act.end()) sub.push_back(v);
    }
    if (sub.empty() || seen.count(sub)) continue;
    // A sub-face must have affine dimension d-1.
    if (d > 1) {
      Eigen::MatrixXd diffs(n, static_cast<Eigen::Index>(sub.size()));
      for (std::size_t j = 0; j < sub.size(); ++j)
        diffs.col(static_cast<Eigen::Index>(j)) = P.vertices()[static_cast<std::size_t>(sub[j])] -
                                                  P.vertices()[static_cast<std::size_t>(sub[0])];
      Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
      lu.setThreshold(1e-10);
      if (lu.rank() != d - 1) continue;
    }
    seen[sub] = m;
    const Eigen::VectorXd nu = P.normals().row(m).transpose();
    const double height = (nu.dot(c) - P.offsets()(m)) / (proj * nu).norm();
    std::vector<int> next = on;
    next.push_back(m);
    total += height * face_volume(P, next);
  }
  return total / d;
}

}  // namespace

Polytope Polytope::from_facets(int dim, std::vector<Facet> facets) {
  if (dim < 1 || dim > kMaxDim)
    throw InvalidPolytope("dimension must be between 1 and " + std::to_string(kMaxDim));
  if (static_cast<int>(facets.size()) < dim + 1)
    throw InvalidPolytope("a bounded polytope needs at least dimension+1 facets");

  Polytope P;
  P.dim_ = dim;
  const int m = static_cast<int>(facets.size());
  P.normals_.resize(m, dim);
  P.offsets_.resize(m);
  for (int k = 0; k < m; ++k) {
    const auto& f = facets[static_cast<std::size_t>(k)];
    if (f.normal.size() != dim)
      throw InvalidPolytope("facet " + std::to_string(k) + ": normal has wrong length");
    if (lattice_gcd(f.normal) != 1)
      throw InvalidPolytope("facet " + std::to_string(k) + ": normal is not primitive");
    P.normals_.row(k) = f.normal.cast<double>().transpose();
    P.offsets_(k) = f.offset;
  }
  P.facets_ = std::move(facets);

  const double scale = std::max(1.0, P.offsets_.cwiseAbs().maxCoeff());
  const double tol = kVertexTol * scale;

  for_each_subset(m, dim, [&](const std::vector<int>& S) {
    const Eigen::MatrixXd N = rows_of(P.normals_, S);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    if (!lu.isInvertible()) return;
    Eigen::VectorXd b(dim);
    for (int i = 0; i < dim; ++i) b(i) = P.offsets_(S[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd l = P.normals_ * x - P.offsets_;
    if (l.minCoeff() < -tol) return;
    for (const auto& v : P.vertices_)
      if ((v - x).cwiseAbs().maxCoeff() <= tol) return;
    P.vertices_.push_back(x);
  });
  if (P.vertices_.empty()) throw InvalidPolytope("polytope is empty or unbounded (no vertices)");

  for (const auto& v : P.vertices_) {
    const Eigen::VectorXd l = P.normals_ * v - P.offsets_;
    std::vector<int> act;
    for (int k = 0; k < m; ++k)
      if (std::abs(l(k)) <= tol) act.push_back(k);
    P.active_.push_back(act);
  }

  // Pointed polyhedron: bounded iff no vertex has a feasible recession ray.
  for (std::size_t vi = 0; vi < P.vertices_.size(); ++vi) {
    const auto& act = P.active_[vi];
    bool unbounded = false;
    for_each_subset(static_cast<int>(act.size()), dim, [&](const std::vector<int>& sel) {
      if (unbounded) return;
      std::vector<int> S;
      for (int s : sel) S.push_back(act[static_cast<std::size_t>(s)]);
      const Eigen::MatrixXd N = rows_of(P.normals_, S);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
      if (!lu.isInvertible()) return;
      const Eigen::MatrixXd rays = lu.inverse();
      for (int j = 0; j < dim; ++j) {
        const Eigen::VectorXd d = rays.col(j);
        const Eigen::VectorXd slopes = P.normals_ * d;
        if (slopes.minCoeff() >= -1e-12) unbounded = true;
      }
    });
    if (unbounded) throw InvalidPolytope("polytope is unbounded");
  }

  P.box_lo_ = P.vertices_.front();
  P.box_hi_ = P.vertices_.front();
  P.center_ = Vec::Zero(dim);
  for (const auto& v : P.vertices_) {
    P.box_lo_ = P.box_lo_.cwiseMin(v);
    P.box_hi_ = P.box_hi_.cwiseMax(v);
    P.center_ += v;
  }
  P.center_ /= static_cast<double>(P.vertices_.size());
  if (min_facet_value(P, P.center_) <= tol) throw InvalidPolytope("polytope has empty interior");

  P.volume_ = face_volume(P, {});
  P.facet_measure_.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    P.facet_measure_[static_cast<std::size_t>(k)] = face_volume(P, {k}) / P.normals_.row(k).norm();
  return P;
}

double Polytope::boundary_measure() const {
  return std::accumulate(facet_measure_.begin(), facet_measure_.end(), 0.0);
}

Polytope Polytope::scaled(double lambda) const {
  std::vector<Facet> f = facets_;
  for (auto& facet : f) facet.offset *= lambda;
  return from_facets(dim_, std::move(f));
}

double min_facet_value(const Polytope& P, const Vec& x) {
  return facet_values(P, x).minCoeff();
}

Polytope parse_polytope(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("polytope file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("facets"))
    throw ParseError("polytope file: expected object with \"dimension\" and \"facets\"");
  if (!doc["dimension"].is_number_integer()) throw ParseError("polytope file: \"dimension\" must be an integer");
  const int dim = doc["dimension"].get<int>();
  if (!doc["facets"].is_array()) throw ParseError("polytope file: \"facets\" must be an array");

  std::vector<Facet> facets;
  for (const auto& f : doc["facets"]) {
    if (!f.is_object() || !f.contains("normal") || !f.contains("offset"))
      throw ParseError("polytope file: each facet needs \"normal\" and \"offset\"");
    const auto& nrm = f["normal"];
    if (!nrm.is_array() || static_cast<int>(nrm.size()) != dim)
      throw ParseError("polytope file: normal must be an array of length dimension");
    Facet facet;
    facet.normal.resize(dim);
    for (int i = 0; i < dim; ++i) {
      if (!nrm[static_cast<std::size_t>(i)].is_number_integer())
        throw ParseError("polytope file: normal entries must be integers");
      facet.normal(i) = nrm[static_cast<std::size_t>(i)].get<int>();
    }
    if (!f["offset"].is_number()) throw ParseError("polytope file: offset must be a number");
    facet.offset = f["offset"].get<double>();
    facets.push_back(std::move(facet));
  }
  return Polytope::from_facets(dim, std::move(facets));
}

Polytope load_polytope(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open polytope file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polytope(ss.str());
}

std::string polytope_to_json(const Polytope& P) {
  nlohmann::json doc;
  doc["dimension"] = P.dim();
  doc["facets"] = nlohmann::json::array();
  for (const auto& f : P.facets()) {
    std::vector<int> n(f.normal.data(), f.normal.data() + f.normal.size());
    doc["facets"].push_back({{"normal", n}, {"offset", f.offset}});
  }
  return doc.dump(2) + "\n";
}

DelzantReport delzant_check(const Polytope& P) {
  DelzantReport report;
  for (const auto& f : P.facets()) report.primitive = report.primitive && lattice_gcd(f.normal) == 1;
  report.pass = report.primitive;
  for (std::size_t v = 0; v < P.vertices().size(); ++v) {
    VertexCheck vc;
    vc.vertex = P.vertices()[v];
    vc.active = P.active_facets()[v];
    if (static_cast<int>(vc.active.size()) != P.dim()) {
      vc.ok = false;
      vc.reason = std::to_string(vc.active.size()) + " active facets, expected " + std::to_string(P.dim());
    } else {
      vc.determinant = rows_of(P.normals(), vc.active).determinant();
      vc.ok = std::abs(std::abs(vc.determinant) - 1.0) < 1e-9;
      if (!vc.ok) vc.reason = "active normals are not a lattice basis";
    }
    report.pass = report.pass && vc.ok;
    report.vertices.push_back(std::move(vc));
  }
  return report;
}

double euclid_dist_facet(const Polytope& P, int k, const Vec& x) {
  return (P.normals().row(k).dot(x) - P.offsets()(k)) / P.normals().row(k).norm();
}

double euclid_dist_boundary(const Polytope& P, const Vec& x) {
  if (min_facet_value(P, x) <= 0.0) throw DomainError("euclid_dist_boundary: point is not interior");
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < P.facet_count(); ++k) best = std::min(best, euclid_dist_facet(P, k, x));
  return best;
}

double QuadratureGrid::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

int QuadratureGrid::find(const CellIndex& cell) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim; ++d) {
    if (cell[static_cast<std::size_t>(d)] < 0 || cell[static_cast<std::size_t>(d)] >= shape[static_cast<std::size_t>(d)])
      return -1;
    flat = flat * static_cast<std::size_t>(shape[static_cast<std::size_t>(d)]) +
           static_cast<std::size_t>(cell[static_cast<std::size_t>(d)]);
  }
  return lookup_[flat];
}

namespace {

// Facet points: midpoint grid on the projection of facet k onto the
// coordinate hyperplane orthogonal to its dominant normal axis.
FacetGrid build_facet_grid(const Polytope& P, int k, double h) {
  FacetGrid fg;
  fg.facet = k;
  const int n = P.dim();
  if (n == 1) {
    const double x = P.offsets()(k) / P.normals()(k, 0);
    fg.points.push_back(Vec::Constant(1, x));
    fg.weights.push_back(1.0);
    return fg;
  }
  const Eigen::VectorXd nu = P.normals().row(k).transpose();
  int axis = 0;
  nu.cwiseAbs().maxCoeff(&axis);
  std::vector<int> free_axes;
  for (int d = 0; d < n; ++d)
    if (d != axis) free_axes.push_back(d);
  const int m = n - 1;
  std::vector<int> counts(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const int d = free_axes[static_cast<std::size_t>(j)];
    counts[static_cast<std::size_t>(j)] =
        std::max(1, static_cast<int>(std::ceil((P.box_hi()(d) - P.box_lo()(d)) / h - 1e-9)));
  }
  const double weight = std::pow(h, m) / std::abs(nu(axis));
  const double tol = 1e-12 * std::max(1.0, P.offsets().cwiseAbs().maxCoeff());
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    Vec x = Vec::Zero(n);
    double rest = P.offsets()(k);
    for (int j = 0; j < m; ++j) {
      const int d = free_axes[static_cast<std::size_t>(j)];
      x(d) = P.box_lo()(d) + (idx[static_cast<std::size_t>(j)] + 0.5) * h;
      rest -= nu(d) * x(d);
    }
    x(axis) = rest / nu(axis);
    const Eigen::VectorXd l = P.normals() * x - P.offsets();
    bool inside = true;
    for (int q = 0; q < P.facet_count(); ++q)
      if (q != k && l(q) < -tol) inside = false;
    if (inside) {
      fg.points.push_back(x);
      fg.weights.push_back(weight);
    }
    int j = 0;
    while (j < m && ++idx[static_cast<std::size_t>(j)] == counts[static_cast<std::size_t>(j)]) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == m) break;
  }
  return fg;
}

}  // namespace

QuadratureGrid build_grid(const Polytope& P, double h, double delta) {
  if (!(h > 0.0) || !(delta >= 0.0)) throw DomainError("build_grid: need h > 0 and delta >= 0");
  QuadratureGrid g;
  g.h = h;
  g.margin = delta;
  g.dim = P.dim();
  g.origin = P.box_lo();
  std::size_t total = 1;
  for (int d = 0; d < g.dim; ++d) {
    const int cells = static_cast<int>(std::ceil((P.box_hi()(d) - P.box_lo()(d)) / h - 1e-9));
    g.shape[static_cast<std::size_t>(d)] = std::max(1, cells);
    total *= static_cast<std::size_t>(g.shape[static_cast<std::size_t>(d)]);
  }
  g.lookup_.assign(total, -1);
  const double tol = 1e-12 * std::max(1.0, delta);
  const double w = std::pow(h, g.dim);

  CellIndex cell{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int d = g.dim - 1; d >= 0; --d) {
      const auto s = static_cast<std::size_t>(g.shape[static_cast<std::size_t>(d)]);
      cell[static_cast<std::size_t>(d)] = static_cast<int>(rem % s);
      rem /= s;
    }
    Vec x(g.dim);
    for (int d = 0; d < g.dim; ++d) x(d) = g.origin(d) + (cell[static_cast<std::size_t>(d)] + 0.5) * h;
    if (min_facet_value(P, x) >= delta - tol && min_facet_value(P, x) > 0.0) {
      g.lookup_[flat] = static_cast<int>(g.points.size());
      g.points.push_back(x);
      g.weights.push_back(w);
      g.cells.push_back(cell);
    }
  }
  if (g.points.empty()) throw DomainError("build_grid: no interior points (h or delta too large)");
  for (int k = 0; k < P.facet_count(); ++k) g.facets.push_back(build_facet_grid(P, k, h));
  return g;
}

}  // namespace toric
