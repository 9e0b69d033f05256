#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "toric/derivatives.hpp"
#include "toric/polytope.hpp"
#include "toric/types.hpp"

namespace toric {

/// Smooth part f of a symplectic potential: samples on a uniform tensor grid
/// interpolated by a not-a-knot quintic tensor spline (C⁴, reproduces
/// polynomials of degree five exactly).
///
/// Nodes are lo + i*h per axis, i = 0..shape-1, and every axis needs at least
/// seven nodes. Values are stored row-major, last axis fastest.
class SmoothPart {
 public:
  static constexpr int kMinNodes = 7;

  SmoothPart() = default;
  SmoothPart(int dim, CellIndex shape, Vec lo, Vec h, std::vector<double> values);

  /// f = 0 on a grid covering [lo, hi] with spacing h (the grid may extend
  /// slightly past hi so that h is exact).
  static SmoothPart zero(const Vec& lo, const Vec& hi, double h);
  /// Grid covering the bounding box of P.
  static SmoothPart zero(const Polytope& P, double h);
  /// Samples fn at the nodes of `like`.
  static SmoothPart sample(const SmoothPart& like, const std::function<double(const Vec&)>& fn);

  int dim() const { return dim_; }
  const CellIndex& shape() const { return shape_; }
  const Vec& lo() const { return lo_; }
  const Vec& h() const { return h_; }
  Vec hi() const;
  std::size_t node_count() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  Vec node(std::size_t flat) const;
  CellIndex node_index(std::size_t flat) const;
  std::size_t flat_index(const CellIndex& idx) const;

  /// Same grid, new samples.
  SmoothPart with_values(std::vector<double> values) const;
  /// x -> lambda * f(x / lambda) on the grid scaled by lambda.
  SmoothPart scaled(double lambda) const;

  bool contains(const Vec& x) const;
  /// Spline value and derivatives up to `order` (<= 4). Throws DomainError
  /// outside the grid box.
  Derivatives derivatives(const Vec& x, int order) const;
  double value(const Vec& x) const { return derivatives(x, 0).value; }

 private:
  void fit();

  int dim_ = 0;
  CellIndex shape_{};
  Vec lo_, h_;
  std::vector<double> values_;
  std::vector<double> coeffs_;  // (shape+4) per axis, row-major
};

/// Writes the checkpoint: one ASCII header line, then the samples as
/// little-endian IEEE-754 doubles. Round trips bit-exactly.
void write_checkpoint(std::ostream& out, const SmoothPart& f);
void save_checkpoint(const std::string& path, const SmoothPart& f);
SmoothPart read_checkpoint(std::istream& in);
SmoothPart load_checkpoint(const std::string& path);

}  // namespace toric
