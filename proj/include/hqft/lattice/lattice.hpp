#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hqft/core/complex.hpp"
#include "hqft/core/sparse.hpp"

namespace hqft {

struct BadDims : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnsupportedAnisotropy : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Direction { Future, Past };

/// Vertex membership mask over all Nt*Nx vertices.
using VertexSet = std::vector<char>;

/// Periodic-in-space, truncated-in-time square lattice with Lorentzian diagonal metrics.
///
/// Indexing (row-major, t outer):
///   vertex        v(t, x)  = t*Nx + x,                  0 <= t < Nt
///   time-edge     te(t, x) = t*Nx + x,                  0 <= t < Nt-1, v(t,x) -> v(t+1,x)
///   space-edge    se(t, x) = (Nt-1)*Nx + t*Nx + x,      0 <= t < Nt,   v(t,x) -> v(t,x+1)
///   face          f(t, x)  = t*Nx + x,                  0 <= t < Nt-1
/// Half-unit time positions: vertices and space-edges at 2t, time-edges and faces at 2t+1.
class Lattice {
 public:
  Lattice(int nt, int nx, Scalar dt, Scalar dx) : nt_(nt), nx_(nx), dt_(std::move(dt)), dx_(std::move(dx)) {
    if (nt_ < 8 || nx_ < 3) throw BadDims("lattice needs nt >= 8 and nx >= 3");
    if (sgn(dt_) <= 0 || sgn(dx_) <= 0) throw BadDims("spacings must be positive");
    if (dt_ != dx_) throw UnsupportedAnisotropy("dt must equal dx");
    build();
  }

  int nt() const { return nt_; }
  int nx() const { return nx_; }
  const Scalar& dt() const { return dt_; }
  const Scalar& dx() const { return dx_; }

  std::size_t num_vertices() const { return std::size_t(nt_) * nx_; }
  std::size_t num_time_edges() const { return std::size_t(nt_ - 1) * nx_; }
  std::size_t num_space_edges() const { return std::size_t(nt_) * nx_; }
  std::size_t num_edges() const { return num_time_edges() + num_space_edges(); }
  std::size_t num_faces() const { return std::size_t(nt_ - 1) * nx_; }
  std::size_t num_cells(int p) const {
    return p == 0 ? num_vertices() : p == 1 ? num_edges() : p == 2 ? num_faces() : 0;
  }

  std::size_t vertex(int t, int x) const { return std::size_t(t) * nx_ + wrap(x); }
  std::size_t time_edge(int t, int x) const { return std::size_t(t) * nx_ + wrap(x); }
  std::size_t space_edge(int t, int x) const { return num_time_edges() + std::size_t(t) * nx_ + wrap(x); }
  std::size_t face(int t, int x) const { return std::size_t(t) * nx_ + wrap(x); }
  int wrap(int x) const { return ((x % nx_) + nx_) % nx_; }

  bool is_time_edge(std::size_t e) const { return e < num_time_edges(); }

  /// (t, x) of the cell's base vertex.
  std::pair<int, int> cell_tx(int p, std::size_t i) const {
    if (p == 1 && !is_time_edge(i)) i -= num_time_edges();
    return {int(i / nx_), int(i % nx_)};
  }

  /// Time position in half-units.
  int position(int p, std::size_t i) const {
    auto [t, x] = cell_tx(p, i);
    if (p == 0) return 2 * t;
    if (p == 1) return is_time_edge(i) ? 2 * t + 1 : 2 * t;
    return 2 * t + 1;
  }

  std::vector<std::size_t> cell_vertices(int p, std::size_t i) const {
    auto [t, x] = cell_tx(p, i);
    if (p == 0) return {i};
    if (p == 1) return is_time_edge(i) ? std::vector<std::size_t>{vertex(t, x), vertex(t + 1, x)}
                                       : std::vector<std::size_t>{vertex(t, x), vertex(t, x + 1)};
    return {vertex(t, x), vertex(t, x + 1), vertex(t + 1, x), vertex(t + 1, x + 1)};
  }

  /// Coboundaries d_p : C^p -> C^{p+1} (p = 0, 1).
  const Matrix& d(int p) const { return p == 0 ? d0_ : d1_; }
  /// Diagonal metric pairing on p-cochains, as a vector and as a matrix.
  const std::vector<Scalar>& metric(int p) const { return h_[p]; }
  Matrix metric_matrix(int p) const { return diag(h_[p]); }
  /// Formal adjoint delta_p = H_{p-1}^{-1} d^T H_p : C^p -> C^{p-1} (p = 1, 2).
  const Matrix& delta(int p) const { return p == 1 ? delta1_ : delta2_; }
  /// d'Alembertian box_p = delta d + d delta on p-cochains.
  const Matrix& box(int p) const { return box_[p]; }

  /// <a, b>_p = sum_i a_i H_p[i] b_i.
  template <class T>
  T pairing(int p, const std::vector<T>& a, const std::vector<T>& b) const {
    if (a.size() != num_cells(p) || b.size() != num_cells(p)) throw ShapeMismatch("pairing size");
    T s(0);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!is_zero(a[i]) && !is_zero(b[i])) s += a[i] * T(h_[p][i]) * b[i];
    return s;
  }

  /// Cochain complex as a chain complex: p-cochains sit in degree -p.
  ChainComplex de_rham_complex() const {
    return ChainComplex({{0, num_vertices()}, {-1, num_edges()}, {-2, num_faces()}}, {{0, d0_}, {-1, d1_}});
  }

  /// Cochains relative to the first and last time slices (cells lying inside them removed).
  ChainComplex relative_de_rham_complex() const {
    std::array<std::vector<std::size_t>, 3> keep;
    for (int p = 0; p < 3; ++p)
      for (std::size_t i = 0; i < num_cells(p); ++i) {
        int pos = position(p, i);
        if (pos != 0 && pos != 2 * (nt_ - 1)) keep[p].push_back(i);
      }
    return ChainComplex({{0, keep[0].size()}, {-1, keep[1].size()}, {-2, keep[2].size()}},
                        {{0, d0_.submatrix(keep[1], keep[0])}, {-1, d1_.submatrix(keep[2], keep[1])}});
  }

  /// Vertices reachable by steps of one slice with at most one spatial step each.
  VertexSet causal_cone(const VertexSet& s, Direction dir, int max_steps = -1) const {
    VertexSet out = s;
    const int step = dir == Direction::Future ? 1 : -1;
    const int t_begin = dir == Direction::Future ? 0 : nt_ - 1;
    std::vector<int> age(num_vertices(), -1);
    for (std::size_t v = 0; v < s.size(); ++v)
      if (s[v]) age[v] = 0;
    for (int t = t_begin; t >= 0 && t < nt_; t += step) {
      int tn = t + step;
      if (tn < 0 || tn >= nt_) break;
      for (int x = 0; x < nx_; ++x) {
        int a = age[vertex(t, x)];
        if (a < 0 || (max_steps >= 0 && a >= max_steps)) continue;
        for (int dxs = -1; dxs <= 1; ++dxs) {
          std::size_t w = vertex(tn, x + dxs);
          out[w] = 1;
          if (age[w] < 0 || age[w] > a + 1) age[w] = s[w] ? 0 : a + 1;
        }
      }
    }
    return out;
  }

  VertexSet empty_set() const { return VertexSet(num_vertices(), 0); }
  VertexSet singleton(std::size_t v) const {
    auto s = empty_set();
    s.at(v) = 1;
    return s;
  }
  VertexSet slice_set(int t) const {
    auto s = empty_set();
    for (int x = 0; x < nx_; ++x) s[vertex(t, x)] = 1;
    return s;
  }

  /// Cells of degree p all of whose vertices lie in s.
  std::vector<std::size_t> cells_in(int p, const VertexSet& s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < num_cells(p); ++i) {
      bool all = true;
      for (auto v : cell_vertices(p, i)) all = all && s[v];
      if (all) out.push_back(i);
    }
    return out;
  }

  /// Vertex support of a p-cochain.
  template <class T>
  VertexSet support(int p, const std::vector<T>& c) const {
    auto s = empty_set();
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!is_zero(c[i]))
        for (auto v : cell_vertices(p, i)) s[v] = 1;
    return s;
  }

  static Matrix diag(const std::vector<Scalar>& v) {
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (std::size_t i = 0; i < v.size(); ++i) t.emplace_back(i, i, v[i]);
    return Matrix::from_triplets(v.size(), v.size(), std::move(t));
  }

 private:
  void build() {
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t0, t1;
    for (int t = 0; t + 1 < nt_; ++t)
      for (int x = 0; x < nx_; ++x) {
        t0.emplace_back(time_edge(t, x), vertex(t + 1, x), Scalar(1));
        t0.emplace_back(time_edge(t, x), vertex(t, x), Scalar(-1));
      }
    for (int t = 0; t < nt_; ++t)
      for (int x = 0; x < nx_; ++x) {
        t0.emplace_back(space_edge(t, x), vertex(t, x + 1), Scalar(1));
        t0.emplace_back(space_edge(t, x), vertex(t, x), Scalar(-1));
      }
    // oriented boundary of the square (t,x) -> (t,x+1) -> (t+1,x+1) -> (t+1,x)
    for (int t = 0; t + 1 < nt_; ++t)
      for (int x = 0; x < nx_; ++x) {
        std::size_t f = face(t, x);
        t1.emplace_back(f, space_edge(t, x), Scalar(1));
        t1.emplace_back(f, time_edge(t, x + 1), Scalar(1));
        t1.emplace_back(f, space_edge(t + 1, x), Scalar(-1));
        t1.emplace_back(f, time_edge(t, x), Scalar(-1));
      }
    d0_ = Matrix::from_triplets(num_edges(), num_vertices(), std::move(t0));
    d1_ = Matrix::from_triplets(num_faces(), num_edges(), std::move(t1));

    h_[0].assign(num_vertices(), dt_ * dx_);
    h_[1].assign(num_edges(), Scalar(dt_ / dx_));
    for (std::size_t e = 0; e < num_time_edges(); ++e) h_[1][e] = -dx_ / dt_;
    h_[2].assign(num_faces(), 1 / (dt_ * dx_));

    auto inv = [](const std::vector<Scalar>& v) {
      std::vector<Scalar> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = 1 / v[i];
      return diag(out);
    };
    delta1_ = inv(h_[0]) * d0_.transpose() * diag(h_[1]);
    delta2_ = inv(h_[1]) * d1_.transpose() * diag(h_[2]);
    box_[0] = delta1_ * d0_;
    box_[1] = d0_ * delta1_ + delta2_ * d1_;
    box_[2] = d1_ * delta2_;
  }

  int nt_, nx_;
  Scalar dt_, dx_;
  Matrix d0_, d1_, delta1_, delta2_;
  std::array<std::vector<Scalar>, 3> h_;
  std::array<Matrix, 3> box_;
};

inline Lattice build_cylinder(int nt, int nx, const Scalar& dt, const Scalar& dx) { return Lattice(nt, nx, dt, dx); }

/// Parameters from `key=value` lines (nt, nx, dt, dx); unknown keys are rejected.
struct LatticeConfig {
  int nt = 12;
  int nx = 4;
  Scalar dt = 1;
  Scalar dx = 1;

  static LatticeConfig parse(std::istream& in) {
    LatticeConfig c;
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos) throw BadDims("malformed config line: " + line);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key == "nt")
        c.nt = std::stoi(val);
      else if (key == "nx")
        c.nx = std::stoi(val);
      else if (key == "dt")
        c.dt = parse_scalar(val);
      else if (key == "dx")
        c.dx = parse_scalar(val);
      else
        throw BadDims("unknown config key: " + key);
    }
    return c;
  }

  Lattice build() const { return Lattice(nt, nx, dt, dx); }
};

/// A p-cochain with its vertex support and slice range.
struct Cochain {
  int degree = 0;
  std::vector<Scalar> coeffs;

  VertexSet support(const Lattice& l) const { return l.support(degree, coeffs); }

  /// [t_min, t_max] over vertices of supporting cells; (1, 0) when zero.
  std::pair<int, int> slice_range(const Lattice& l) const {
    int lo = l.nt(), hi = -1;
    auto s = support(l);
    for (std::size_t v = 0; v < s.size(); ++v)
      if (s[v]) {
        int t = int(v) / l.nx();
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    if (hi < 0) return {1, 0};
    return {lo, hi};
  }
};

}  // namespace hqft
