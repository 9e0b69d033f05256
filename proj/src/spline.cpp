#include "toric/spline.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace toric {

namespace {

// Uniform quintic B-spline pieces, scaled by 120: piece m is M6(m + t) on
// t in [0,1], ascending powers of t.
constexpr double kPiece[6][6] = {
    {0, 0, 0, 0, 0, 1},      {1, 5, 10, 10, 5, -5},    {26, 50, 20, -20, -20, 10},
    {66, 0, -60, 0, 30, -10}, {26, -50, 20, 20, -20, 5}, {1, -5, 10, -10, 5, -1},
};

// B[k][m]: m-th t-derivative of the basis function attached to coefficient
// cell+k (k = 0..5) at local coordinate t.
void basis_table(double t, double inv_h, int order, double B[6][5]) {
  double scale = 1.0 / 120.0;
  for (int m = 0; m <= order; ++m) {
    for (int k = 0; k < 6; ++k) {
      const double* c = kPiece[5 - k];
      double acc = 0.0;
      for (int p = 5; p >= m; --p) {
        double falling = 1.0;
        for (int r = 0; r < m; ++r) falling *= static_cast<double>(p - r);
        acc = acc * t + c[p] * falling;
      }
      B[k][m] = acc * scale;
    }
    scale *= inv_h;
  }
}

// (N+4) x N operator mapping node values to not-a-knot spline coefficients.
std::shared_ptr<const Eigen::MatrixXd> fit_operator(int N) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(N); it != cache.end()) return it->second;

  const int M = N + 4;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
  const double stencil[5] = {1, 26, 66, 26, 1};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < 5; ++j) A(i, i + j) = stencil[j] / 120.0;
  // Continuity of the fifth derivative at knots 1, 2, N-3, N-2.
  const double binom6[7] = {1, 6, 15, 20, 15, 6, 1};
  const int knots[4] = {1, 2, N - 3, N - 2};
  for (int r = 0; r < 4; ++r) {
    const int i = knots[r];
    for (int s = 0; s <= 6; ++s) A(N + r, i + 5 - s) = (s % 2 == 0 ? 1.0 : -1.0) * binom6[s];
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(M, N);
  rhs.topRows(N).setIdentity();
  auto op = std::make_shared<const Eigen::MatrixXd>(A.fullPivLu().solve(rhs));
  cache.emplace(N, op);
  return op;
}

struct AlphaTable {
  std::vector<std::array<int, kMaxDim>> alphas;  // all multi-indices with |alpha| <= 4
  std::vector<int> order;                       // |alpha|
};

int alpha_key(const std::array<int, kMaxDim>& a) {
  int key = 0;
  for (int d = kMaxDim - 1; d >= 0; --d) key = key * 5 + a[static_cast<std::size_t>(d)];
  return key;
}

const AlphaTable& alpha_table(int n) {
  static const std::array<AlphaTable, kMaxDim + 1> tables = [] {
    std::array<AlphaTable, kMaxDim + 1> t;
    for (int dim = 1; dim <= kMaxDim; ++dim) {
      std::array<int, kMaxDim> a{};
      while (true) {
        int s = 0;
        for (int d = 0; d < dim; ++d) s += a[static_cast<std::size_t>(d)];
        if (s <= 4) {
          t[static_cast<std::size_t>(dim)].alphas.push_back(a);
          t[static_cast<std::size_t>(dim)].order.push_back(s);
        }
        int d = 0;
        while (d < dim && ++a[static_cast<std::size_t>(d)] > 4) a[static_cast<std::size_t>(d++)] = 0;
        if (d == dim) break;
      }
    }
    return t;
  }();
  return tables[static_cast<std::size_t>(n)];
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("checkpoint: bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

SmoothPart::SmoothPart(int dim, CellIndex shape, Vec lo, Vec h, std::vector<double> values)
    : dim_(dim), shape_(shape), lo_(std::move(lo)), h_(std::move(h)), values_(std::move(values)) {
  if (dim_ < 1 || dim_ > kMaxDim) throw DomainError("SmoothPart: unsupported dimension");
  if (lo_.size() != dim_ || h_.size() != dim_) throw DomainError("SmoothPart: lo/h size mismatch");
  std::size_t total = 1;
  for (int d = 0; d < dim_; ++d) {
    if (shape_[static_cast<std::size_t>(d)] < kMinNodes)
      throw DomainError("SmoothPart: each axis needs at least 7 nodes");
    if (!(h_(d) > 0.0)) throw DomainError("SmoothPart: spacing must be positive");
    total *= static_cast<std::size_t>(shape_[static_cast<std::size_t>(d)]);
  }
  if (values_.size() != total) throw DomainError("SmoothPart: sample count does not match grid shape");
  fit();
}

SmoothPart SmoothPart::zero(const Vec& lo, const Vec& hi, double h) {
  const int n = static_cast<int>(lo.size());
  CellIndex shape{};
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) {
    const int intervals = static_cast<int>(std::ceil((hi(d) - lo(d)) / h - 1e-9));
    shape[static_cast<std::size_t>(d)] = std::max(kMinNodes, intervals + 1);
    total *= static_cast<std::size_t>(shape[static_cast<std::size_t>(d)]);
  }
  return SmoothPart(n, shape, lo, Vec::Constant(n, h), std::vector<double>(total, 0.0));
}

SmoothPart SmoothPart::zero(const Polytope& P, double h) { return zero(P.box_lo(), P.box_hi(), h); }

SmoothPart SmoothPart::sample(const SmoothPart& like, const std::function<double(const Vec&)>& fn) {
  std::vector<double> v(like.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(like.node(i));
  return like.with_values(std::move(v));
}

Vec SmoothPart::hi() const {
  Vec out(dim_);
  for (int d = 0; d < dim_; ++d) out(d) = lo_(d) + (shape_[static_cast<std::size_t>(d)] - 1) * h_(d);
  return out;
}

CellIndex SmoothPart::node_index(std::size_t flat) const {
  CellIndex idx{};
  for (int d = dim_ - 1; d >= 0; --d) {
    const auto s = static_cast<std::size_t>(shape_[static_cast<std::size_t>(d)]);
    idx[static_cast<std::size_t>(d)] = static_cast<int>(flat % s);
    flat /= s;
  }
  return idx;
}

std::size_t SmoothPart::flat_index(const CellIndex& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d)
    flat = flat * static_cast<std::size_t>(shape_[static_cast<std::size_t>(d)]) +
           static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
  return flat;
}

Vec SmoothPart::node(std::size_t flat) const {
  const CellIndex idx = node_index(flat);
  Vec x(dim_);
  for (int d = 0; d < dim_; ++d) x(d) = lo_(d) + idx[static_cast<std::size_t>(d)] * h_(d);
  return x;
}

SmoothPart SmoothPart::with_values(std::vector<double> values) const {
  return SmoothPart(dim_, shape_, lo_, h_, std::move(values));
}

SmoothPart SmoothPart::scaled(double lambda) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= lambda;
  return SmoothPart(dim_, shape_, lo_ * lambda, h_ * lambda, std::move(v));
}

bool SmoothPart::contains(const Vec& x) const {
  for (int d = 0; d < dim_; ++d) {
    const double slack = 1e-9 * h_(d);
    const double top = lo_(d) + (shape_[static_cast<std::size_t>(d)] - 1) * h_(d);
    if (x(d) < lo_(d) - slack || x(d) > top + slack) return false;
  }
  return true;
}

void SmoothPart::fit() {
  // Apply the 1-D fit operator along each axis in turn; sizes grow from N to
  // N+4 axis by axis.
  std::vector<double> cur = values_;
  std::array<int, kMaxDim> cur_shape{};
  for (int d = 0; d < dim_; ++d) cur_shape[static_cast<std::size_t>(d)] = shape_[static_cast<std::size_t>(d)];

  for (int axis = 0; axis < dim_; ++axis) {
    const int N = shape_[static_cast<std::size_t>(axis)];
    const auto op = fit_operator(N);
    std::size_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(cur_shape[static_cast<std::size_t>(d)]);
    for (int d = axis + 1; d < dim_; ++d) inner *= static_cast<std::size_t>(cur_shape[static_cast<std::size_t>(d)]);
    const auto M = static_cast<std::size_t>(N + 4);
    std::vector<double> next(outer * M * inner, 0.0);
    Eigen::VectorXd line(N);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        for (int j = 0; j < N; ++j) line(j) = cur[(o * static_cast<std::size_t>(N) + static_cast<std::size_t>(j)) * inner + i];
        const Eigen::VectorXd c = (*op) * line;
        for (std::size_t j = 0; j < M; ++j) next[(o * M + j) * inner + i] = c(static_cast<Eigen::Index>(j));
      }
    }
    cur.swap(next);
    cur_shape[static_cast<std::size_t>(axis)] = N + 4;
  }
  coeffs_ = std::move(cur);
}

Derivatives SmoothPart::derivatives(const Vec& x, int order) const {
  if (!contains(x)) throw DomainError("SmoothPart: point outside the spline grid");
  const int n = dim_;
  double B[kMaxDim][6][5];
  std::array<int, kMaxDim> cell{};
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t s = 1;
  for (int d = n - 1; d >= 0; --d) {
    stride[static_cast<std::size_t>(d)] = s;
    s *= static_cast<std::size_t>(shape_[static_cast<std::size_t>(d)] + 4);
  }
  std::size_t base = 0;
  for (int d = 0; d < n; ++d) {
    const int N = shape_[static_cast<std::size_t>(d)];
    const double u = (x(d) - lo_(d)) / h_(d);
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, N - 2);
    cell[static_cast<std::size_t>(d)] = i;
    basis_table(u - i, 1.0 / h_(d), order, B[d]);
    base += static_cast<std::size_t>(i) * stride[static_cast<std::size_t>(d)];
  }

  const AlphaTable& table = alpha_table(n);
  std::array<double, 625> D{};
  int block = 1;
  for (int d = 0; d < n; ++d) block *= 6;
  for (std::size_t a = 0; a < table.alphas.size(); ++a) {
    if (table.order[a] > order) continue;
    const auto& alpha = table.alphas[a];
    double acc = 0.0;
    for (int b = 0; b < block; ++b) {
      int rem = b;
      std::size_t off = base;
      double prod = 1.0;
      for (int d = n - 1; d >= 0; --d) {
        const int k = rem % 6;
        rem /= 6;
        off += static_cast<std::size_t>(k) * stride[static_cast<std::size_t>(d)];
        prod *= B[d][k][alpha[static_cast<std::size_t>(d)]];
      }
      acc += coeffs_[off] * prod;
    }
    D[static_cast<std::size_t>(alpha_key(alpha))] = acc;
  }

  Derivatives out(n, order);
  auto key_of = [&](std::initializer_list<int> axes) {
    std::array<int, kMaxDim> a{};
    for (int ax : axes) ++a[static_cast<std::size_t>(ax)];
    return D[static_cast<std::size_t>(alpha_key(a))];
  };
  out.value = D[0];
  if (order >= 1)
    for (int i = 0; i < n; ++i) out.gradient(i) = key_of({i});
  if (order >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.hessian(i, j) = key_of({i, j});
  if (order >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out.third(i, j, k) = key_of({i, j, k});
  if (order >= 4)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) out.fourth(i, j, k, l) = key_of({i, j, k, l});
  return out;
}

void write_checkpoint(std::ostream& out, const SmoothPart& f) {
  std::ostringstream header;
  header << "TORIC-CHECKPOINT 1 n=" << f.dim() << " shape=";
  for (int d = 0; d < f.dim(); ++d) header << (d ? "," : "") << f.shape()[static_cast<std::size_t>(d)];
  header << " box=";
  const Vec hi = f.hi();
  for (int d = 0; d < f.dim(); ++d)
    header << (d ? "," : "") << format_double(f.lo()(d)) << "," << format_double(hi(d));
  header << " h=";
  for (int d = 0; d < f.dim(); ++d) header << (d ? "," : "") << format_double(f.h()(d));
  header << "\n";
  const std::string hs = header.str();
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));

  std::vector<unsigned char> bytes(f.values().size() * 8);
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(f.values()[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_checkpoint(const std::string& path, const SmoothPart& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write checkpoint " + path);
  write_checkpoint(out, f);
}

SmoothPart read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("checkpoint: missing header");
  const auto fields = split(line, ' ');
  if (fields.size() != 6 || fields[0] != "TORIC-CHECKPOINT" || fields[1] != "1")
    throw ParseError("checkpoint: bad header");
  auto value_of = [&](std::string_view field, std::string_view key) {
    if (field.substr(0, key.size()) != key) throw ParseError("checkpoint: expected field " + std::string(key));
    return field.substr(key.size());
  };
  const int n = static_cast<int>(parse_double(value_of(fields[2], "n=")));
  if (n < 1 || n > kMaxDim) throw ParseError("checkpoint: bad dimension");
  const auto shape_s = split(value_of(fields[3], "shape="), ',');
  const auto box_s = split(value_of(fields[4], "box="), ',');
  const auto h_s = split(value_of(fields[5], "h="), ',');
  if (static_cast<int>(shape_s.size()) != n || static_cast<int>(box_s.size()) != 2 * n ||
      static_cast<int>(h_s.size()) != n)
    throw ParseError("checkpoint: header field lengths do not match n");
  CellIndex shape{};
  Vec lo(n), h(n);
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) {
    const double s = parse_double(shape_s[static_cast<std::size_t>(d)]);
    if (s < SmoothPart::kMinNodes || s != std::floor(s) || s > 1e7) throw ParseError("checkpoint: bad shape");
    shape[static_cast<std::size_t>(d)] = static_cast<int>(s);
    total *= static_cast<std::size_t>(s);
    lo(d) = parse_double(box_s[static_cast<std::size_t>(2 * d)]);
    h(d) = parse_double(h_s[static_cast<std::size_t>(d)]);
  }
  std::vector<unsigned char> bytes(total * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw ParseError("checkpoint: truncated data");
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return SmoothPart(n, shape, lo, h, std::move(values));
}

SmoothPart load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace toric
