#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "toric/types.hpp"

namespace toric {

/// One facet inequality l(x) = <x, normal> - offset >= 0.
struct Facet {
  Eigen::VectorXi normal;
  double offset = 0.0;
};

/// Thrown when facet data do not describe a bounded, full-dimensional
/// polytope with primitive normals.
class InvalidPolytope : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Convex polytope P = { x : l_k(x) >= 0 } with integral primitive normals.
///
/// Vertices, bounding box, volume and the lattice-normalized facet measures
/// are computed once on construction; the object is immutable afterwards.
/// Delzant smoothness is not required to construct one, see delzant_check().
class Polytope {
 public:
  Polytope() = default;

  /// Validates and builds. Throws InvalidPolytope on non-primitive normals,
  /// unbounded or empty-interior input.
  static Polytope from_facets(int dim, std::vector<Facet> facets);

  int dim() const { return dim_; }
  int facet_count() const { return static_cast<int>(facets_.size()); }
  const std::vector<Facet>& facets() const { return facets_; }

  /// Facet normals as rows of a real matrix (facet_count x dim).
  const Eigen::MatrixXd& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  Vec normal(int k) const { return normals_.row(k).transpose(); }

  const std::vector<Vec>& vertices() const { return vertices_; }
  /// Indices of the facets active (l_k = 0) at each vertex.
  const std::vector<std::vector<int>>& active_facets() const { return active_; }

  const Vec& box_lo() const { return box_lo_; }
  const Vec& box_hi() const { return box_hi_; }
  /// Average of the vertices; always interior.
  const Vec& center() const { return center_; }

  double volume() const { return volume_; }
  /// Lattice measure sigma(F_k), defined by d(sigma) ^ d(l_k) = d(mu).
  double facet_measure(int k) const { return facet_measure_[static_cast<std::size_t>(k)]; }
  double boundary_measure() const;

  /// lambda * P: same normals, offsets scaled.
  Polytope scaled(double lambda) const;

 private:
  int dim_ = 0;
  std::vector<Facet> facets_;
  Eigen::MatrixXd normals_;
  Eigen::VectorXd offsets_;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> active_;
  Vec box_lo_, box_hi_, center_;
  double volume_ = 0.0;
  std::vector<double> facet_measure_;
};

/// Facet values l_k(x) = <x, u_k> - lambda_k for all k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> facet_values(
    const Polytope& P, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> l(P.facet_count());
  for (int k = 0; k < P.facet_count(); ++k) {
    Scalar acc = -Scalar(P.offsets()(k));
    for (int i = 0; i < P.dim(); ++i) acc += Scalar(P.normals()(k, i)) * x(i);
    l(k) = acc;
  }
  return l;
}

/// min_k l_k(x): positive in the interior, zero on the boundary.
double min_facet_value(const Polytope& P, const Vec& x);

/// Parses {"dimension": n, "facets": [{"normal": [...], "offset": v}, ...]}.
/// Throws ParseError on malformed text and InvalidPolytope on bad geometry.
Polytope parse_polytope(std::string_view json_text);
Polytope load_polytope(const std::string& path);
std::string polytope_to_json(const Polytope& P);

struct VertexCheck {
  Vec vertex;
  std::vector<int> active;
  double determinant = 0.0;
  bool ok = false;
  std::string reason;
};

struct DelzantReport {
  bool pass = false;
  bool primitive = true;
  std::vector<VertexCheck> vertices;
};

/// Per-vertex unimodularity: exactly n active facets whose normals form a
/// basis of the integer lattice.
DelzantReport delzant_check(const Polytope& P);

/// Euclidean distance min_k l_k(x)/|u_k| from an interior point to the boundary.
double euclid_dist_boundary(const Polytope& P, const Vec& x);

/// Distance from x to the hyperplane of facet k.
double euclid_dist_facet(const Polytope& P, int k, const Vec& x);

using CellIndex = std::array<int, kMaxDim>;

struct FacetGrid {
  int facet = 0;
  std::vector<Vec> points;
  std::vector<double> weights;  // sigma-weights
};

/// Cell-centred tensor grid clipped to P_delta = { min_k l_k >= delta }.
struct QuadratureGrid {
  double h = 0.0;
  double margin = 0.0;
  int dim = 0;
  Vec origin;        // lower corner of cell (0,...,0)
  CellIndex shape{};  // cells per axis
  std::vector<Vec> points;
  std::vector<double> weights;
  std::vector<CellIndex> cells;
  std::vector<FacetGrid> facets;

  std::size_t size() const { return points.size(); }
  double total_weight() const;
  /// Index of the point in the given cell, or -1 if that cell is masked out.
  int find(const CellIndex& cell) const;

  std::vector<int> lookup_;
};

/// Interior points are cell centres with min_k l_k >= delta, weight h^n.
/// Facet grids carry the lattice measure. Throws DomainError when empty.
QuadratureGrid build_grid(const Polytope& P, double h, double delta);

}  // namespace toric
