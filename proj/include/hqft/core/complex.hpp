#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "hqft/core/linalg.hpp"
#include "hqft/core/sparse.hpp"

namespace hqft {

struct NotAComplex : std::runtime_error {
  int degree;
  std::size_t row, col;
  NotAComplex(int n, std::size_t r, std::size_t c)
      : std::runtime_error("d(" + std::to_string(n - 1) + ") * d(" + std::to_string(n) + ") nonzero at (" +
                           std::to_string(r) + ", " + std::to_string(c) + ")"),
        degree(n),
        row(r),
        col(c) {}
};

struct DimensionOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bounded chain complex; diff(n) maps degree n to degree n-1.
template <class T>
class BasicChainComplex {
 public:
  using Mat = SparseMatrix<T>;

  BasicChainComplex() = default;

  /// Unchecked construction; use make_complex for validation.
  BasicChainComplex(std::map<int, std::size_t> dims, std::map<int, Mat> diffs)
      : dims_(std::move(dims)), diffs_(std::move(diffs)) {
    for (auto it = dims_.begin(); it != dims_.end();)
      it = it->second == 0 ? dims_.erase(it) : std::next(it);
    for (auto it = diffs_.begin(); it != diffs_.end();)
      it = (it->second.rows() == 0 || it->second.cols() == 0) ? diffs_.erase(it) : std::next(it);
  }

  std::size_t dim(int n) const {
    auto it = dims_.find(n);
    return it == dims_.end() ? 0 : it->second;
  }

  Mat diff(int n) const {
    auto it = diffs_.find(n);
    if (it != diffs_.end()) return it->second;
    return Mat(dim(n - 1), dim(n));
  }

  const std::map<int, std::size_t>& dims() const { return dims_; }
  const std::map<int, Mat>& diffs() const { return diffs_; }

  /// Ascending degrees with nonzero dimension.
  std::vector<int> degrees() const {
    std::vector<int> out;
    for (const auto& [n, d] : dims_) out.push_back(n);
    return out;
  }
  bool empty() const { return dims_.empty(); }
  int min_degree() const { return dims_.empty() ? 0 : dims_.begin()->first; }
  int max_degree() const { return dims_.empty() ? 0 : dims_.rbegin()->first; }

  std::size_t total_dim() const {
    std::size_t s = 0;
    for (const auto& [n, d] : dims_) s += d;
    return s;
  }

  std::map<int, std::vector<std::string>> labels;

  bool operator==(const BasicChainComplex& o) const {
    if (dims_ != o.dims_) return false;
    for (int n : degrees())
      if (diff(n) != o.diff(n)) return false;
    for (int n : o.degrees())
      if (diff(n) != o.diff(n)) return false;
    return true;
  }

 private:
  std::map<int, std::size_t> dims_;
  std::map<int, Mat> diffs_;
};

using ChainComplex = BasicChainComplex<Scalar>;
using GChainComplex = BasicChainComplex<Gaussian>;

/// Throws NotAComplex at the first nonzero entry of some diff(n-1)*diff(n).
template <class T>
void check_complex(const BasicChainComplex<T>& c) {
  for (const auto& [n, m] : c.diffs()) {
    if (m.rows() != c.dim(n - 1) || m.cols() != c.dim(n))
      throw ShapeMismatch("diff(" + std::to_string(n) + ") has wrong shape");
  }
  for (const auto& [n, m] : c.diffs()) {
    auto it = c.diffs().find(n - 1);
    if (it == c.diffs().end()) continue;
    auto p = it->second * m;
    for (std::size_t r = 0; r < p.rows(); ++r)
      if (!p.row(r).empty()) throw NotAComplex(n, r, p.row(r).front().first);
  }
}

template <class T>
BasicChainComplex<T> make_complex(std::map<int, std::size_t> dims, std::map<int, SparseMatrix<T>> diffs) {
  for (const auto& [n, m] : diffs) {
    auto dim = [&](int k) {
      auto it = dims.find(k);
      return it == dims.end() ? std::size_t{0} : it->second;
    };
    if (m.rows() != dim(n - 1) || m.cols() != dim(n))
      throw ShapeMismatch("diff(" + std::to_string(n) + ") has wrong shape");
  }
  BasicChainComplex<T> c(std::move(dims), std::move(diffs));
  check_complex(c);
  return c;
}

/// V[p]_n = V_{n-p} with differential (-1)^p d.
template <class T>
BasicChainComplex<T> shift(const BasicChainComplex<T>& c, int p) {
  std::map<int, std::size_t> dims;
  std::map<int, SparseMatrix<T>> diffs;
  for (const auto& [n, d] : c.dims()) dims[n + p] = d;
  for (const auto& [n, m] : c.diffs()) diffs[n + p] = (p % 2 == 0) ? m : -m;
  BasicChainComplex<T> out(std::move(dims), std::move(diffs));
  for (const auto& [n, l] : c.labels) out.labels[n + p] = l;
  return out;
}

/// Family of degree-k components L_m : V_m -> W_{m+k}.
template <class T>
struct BasicMapChain {
  BasicChainComplex<T> source;
  BasicChainComplex<T> target;
  int degree = 0;
  std::map<int, SparseMatrix<T>> components;

  SparseMatrix<T> component(int m) const {
    auto it = components.find(m);
    if (it != components.end()) return it->second;
    return SparseMatrix<T>(target.dim(m + degree), source.dim(m));
  }

  void set(int m, SparseMatrix<T> a) {
    if (a.rows() != target.dim(m + degree) || a.cols() != source.dim(m))
      throw ShapeMismatch("map component " + std::to_string(m) + " has wrong shape");
    if (a.is_zero_matrix())
      components.erase(m);
    else
      components[m] = std::move(a);
  }

  bool is_zero() const {
    for (const auto& [m, a] : components)
      if (!a.is_zero_matrix()) return false;
    return true;
  }

  BasicMapChain operator+(const BasicMapChain& o) const { return combine(o, T(1)); }
  BasicMapChain operator-(const BasicMapChain& o) const { return combine(o, T(-1)); }
  BasicMapChain scaled(const T& s) const {
    BasicMapChain out{source, target, degree, {}};
    for (const auto& [m, a] : components) out.set(m, a.scaled(s));
    return out;
  }

  bool operator==(const BasicMapChain& o) const {
    if (degree != o.degree) return false;
    for (int m : source.degrees())
      if (component(m) != o.component(m)) return false;
    return true;
  }

 private:
  BasicMapChain combine(const BasicMapChain& o, const T& s) const {
    if (degree != o.degree) throw ShapeMismatch("map chains of different degree");
    BasicMapChain out{source, target, degree, {}};
    for (int m : source.degrees()) out.set(m, component(m) + o.component(m).scaled(s));
    return out;
  }
};

template <class T>
using BasicChainMap = BasicMapChain<T>;  // a chain map is a degree-0 cycle

using MapChain = BasicMapChain<Scalar>;
using ChainMap = BasicMapChain<Scalar>;
using GMapChain = BasicMapChain<Gaussian>;

template <class T>
BasicMapChain<T> zero_map(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w, int k = 0) {
  return {v, w, k, {}};
}

template <class T>
BasicMapChain<T> identity_map(const BasicChainComplex<T>& v) {
  BasicMapChain<T> f{v, v, 0, {}};
  for (const auto& [n, d] : v.dims()) f.set(n, SparseMatrix<T>::identity(d));
  return f;
}

/// g after f, of degree |f| + |g|.
template <class T>
BasicMapChain<T> compose(const BasicMapChain<T>& g, const BasicMapChain<T>& f) {
  BasicMapChain<T> out{f.source, g.target, f.degree + g.degree, {}};
  for (int m : f.source.degrees()) out.set(m, g.component(m + f.degree) * f.component(m));
  return out;
}

/// (dL)_m = d^W L_m - (-1)^k L_{m-1} d^V.
template <class T>
BasicMapChain<T> boundary(const BasicMapChain<T>& l) {
  const int k = l.degree;
  BasicMapChain<T> out{l.source, l.target, k - 1, {}};
  for (int m : l.source.degrees()) {
    auto a = l.target.diff(m + k) * l.component(m);
    auto b = l.component(m - 1) * l.source.diff(m);
    out.set(m, (k % 2 == 0) ? a - b : a + b);
  }
  return out;
}

template <class T>
bool is_chain_map(const BasicMapChain<T>& f) {
  return f.degree == 0 && boundary(f).is_zero();
}

/// First (degree, row, col) where d f != f d, if any.
template <class T>
std::optional<std::tuple<int, std::size_t, std::size_t>> chain_map_witness(const BasicMapChain<T>& f) {
  auto b = boundary(f);
  for (const auto& [m, a] : b.components)
    for (std::size_t r = 0; r < a.rows(); ++r)
      if (!a.row(r).empty()) return std::make_tuple(m, r, a.row(r).front().first);
  return std::nullopt;
}

/// hom(V, W) with basis: degree n is ordered by source degree m ascending, then L_m entries row-major.
template <class T>
class MappingComplex {
 public:
  using Mat = SparseMatrix<T>;

  MappingComplex(BasicChainComplex<T> v, BasicChainComplex<T> w) : v_(std::move(v)), w_(std::move(w)) {}

  const BasicChainComplex<T>& source() const { return v_; }
  const BasicChainComplex<T>& target() const { return w_; }

  /// (m, offset) blocks of degree n.
  std::vector<std::pair<int, std::size_t>> layout(int n) const {
    std::vector<std::pair<int, std::size_t>> out;
    std::size_t off = 0;
    for (int m : v_.degrees()) {
      std::size_t sz = v_.dim(m) * w_.dim(m + n);
      if (sz == 0) continue;
      out.emplace_back(m, off);
      off += sz;
    }
    return out;
  }

  std::size_t dim(int n) const {
    std::size_t s = 0;
    for (int m : v_.degrees()) s += v_.dim(m) * w_.dim(m + n);
    return s;
  }

  int min_degree() const { return w_.min_degree() - v_.max_degree(); }
  int max_degree() const { return w_.max_degree() - v_.min_degree(); }

  std::vector<T> flatten(const BasicMapChain<T>& l) const {
    std::vector<T> x(dim(l.degree));
    for (auto [m, off] : layout(l.degree)) {
      auto a = l.component(m);
      const std::size_t nc = v_.dim(m);
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (const auto& [j, val] : a.row(i)) x[off + i * nc + j] = val;
    }
    return x;
  }

  BasicMapChain<T> unflatten(const std::vector<T>& x, int n) const {
    if (x.size() != dim(n)) throw ShapeMismatch("flat map chain size");
    BasicMapChain<T> l{v_, w_, n, {}};
    for (auto [m, off] : layout(n)) {
      const std::size_t nr = w_.dim(m + n), nc = v_.dim(m);
      std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
      for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j)
          if (!is_zero(x[off + i * nc + j])) trips.emplace_back(i, j, x[off + i * nc + j]);
      l.set(m, Mat::from_triplets(nr, nc, std::move(trips)));
    }
    return l;
  }

  /// Matrix of the boundary from degree n to degree n-1.
  Mat boundary_matrix(int n) const {
    const std::size_t rows = dim(n - 1), cols = dim(n);
    std::map<int, std::size_t> off_lo;
    for (auto [m, off] : layout(n - 1)) off_lo[m] = off;
    const T sign = (n % 2 == 0) ? T(-1) : T(1);  // -(-1)^n
    std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
    for (auto [m, off] : layout(n)) {
      const std::size_t nr = w_.dim(m + n), nc = v_.dim(m);
      // d^W L_m lands in component m of degree n-1.
      if (auto it = off_lo.find(m); it != off_lo.end()) {
        auto dw = w_.diff(m + n).transpose();  // rows indexed by i
        for (std::size_t i = 0; i < nr; ++i)
          for (const auto& [ip, val] : dw.row(i))
            for (std::size_t j = 0; j < nc; ++j) trips.emplace_back(it->second + ip * nc + j, off + i * nc + j, val);
      }
      // L_m d^V_{m+1} lands in component m+1 of degree n-1.
      if (auto it = off_lo.find(m + 1); it != off_lo.end()) {
        auto dv = v_.diff(m + 1);  // rows indexed by j
        const std::size_t nc1 = v_.dim(m + 1);
        for (std::size_t j = 0; j < nc; ++j)
          for (const auto& [jj, val] : dv.row(j))
            for (std::size_t i = 0; i < nr; ++i) trips.emplace_back(it->second + i * nc1 + jj, off + i * nc + j, sign * val);
      }
    }
    return Mat::from_triplets(rows, cols, std::move(trips));
  }

  /// Fully materialized complex on degrees [min_degree, max_degree].
  BasicChainComplex<T> complex() const {
    std::map<int, std::size_t> dims;
    std::map<int, Mat> diffs;
    if (v_.empty() || w_.empty()) return {};
    for (int n = min_degree(); n <= max_degree(); ++n) dims[n] = dim(n);
    for (int n = min_degree() + 1; n <= max_degree(); ++n) diffs[n] = boundary_matrix(n);
    return BasicChainComplex<T>(std::move(dims), std::move(diffs));
  }

 private:
  BasicChainComplex<T> v_, w_;
};

template <class T>
MappingComplex<T> mapping_complex(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w) {
  return {v, w};
}

/// The identity hom(V, W[p]) -> hom(V, W)[p]; the two sign conventions agree componentwise.
template <class T>
BasicMapChain<T> hom_shift_identification(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w, int p) {
  auto lhs = MappingComplex<T>(v, shift(w, p)).complex();
  auto rhs = shift(MappingComplex<T>(v, w).complex(), p);
  BasicMapChain<T> f{lhs, rhs, 0, {}};
  for (const auto& [n, d] : lhs.dims()) {
    if (rhs.dim(n) != d) throw ShapeMismatch("hom shift dimensions differ");
    f.set(n, SparseMatrix<T>::identity(d));
  }
  return f;
}

/// Tensor product together with the braiding V (x) W -> W (x) V.
template <class T>
struct TensorProduct {
  BasicChainComplex<T> complex;
  BasicMapChain<T> braiding;  // filled by tensor_with_braiding
};

namespace detail {

/// Block offsets of (V (x) W)_n: m ascending, then (i, j) row-major.
template <class T>
std::map<int, std::size_t> tensor_offsets(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w, int n) {
  std::map<int, std::size_t> off;
  std::size_t o = 0;
  for (int m : v.degrees()) {
    std::size_t sz = v.dim(m) * w.dim(n - m);
    if (sz == 0) continue;
    off[m] = o;
    o += sz;
  }
  return off;
}

template <class T>
std::set<int> tensor_degrees(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w) {
  std::set<int> out;
  for (int a : v.degrees())
    for (int b : w.degrees()) out.insert(a + b);
  return out;
}

}  // namespace detail

template <class T>
BasicChainComplex<T> tensor(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w) {
  std::map<int, std::size_t> dims;
  std::map<int, SparseMatrix<T>> diffs;
  auto degs = detail::tensor_degrees(v, w);
  for (int n : degs) {
    std::size_t d = 0;
    for (int m : v.degrees()) d += v.dim(m) * w.dim(n - m);
    dims[n] = d;
  }
  auto dimof = [&](int n) {
    auto it = dims.find(n);
    return it == dims.end() ? std::size_t{0} : it->second;
  };
  for (int n : degs) {
    if (dimof(n - 1) == 0) continue;
    auto src = detail::tensor_offsets(v, w, n);
    auto dst = detail::tensor_offsets(v, w, n - 1);
    std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
    for (auto [m, off] : src) {
      const std::size_t nv = v.dim(m), nw = w.dim(n - m);
      // dv (x) w
      if (auto it = dst.find(m - 1); it != dst.end()) {
        auto dv = v.diff(m).transpose();
        for (std::size_t i = 0; i < nv; ++i)
          for (const auto& [ip, val] : dv.row(i))
            for (std::size_t j = 0; j < nw; ++j) trips.emplace_back(it->second + ip * nw + j, off + i * nw + j, val);
      }
      // (-1)^m v (x) dw
      if (auto it = dst.find(m); it != dst.end()) {
        auto dw = w.diff(n - m).transpose();
        const std::size_t nw1 = w.dim(n - m - 1);
        const T s = (m % 2 == 0) ? T(1) : T(-1);
        for (std::size_t j = 0; j < nw; ++j)
          for (const auto& [jp, val] : dw.row(j))
            for (std::size_t i = 0; i < nv; ++i) trips.emplace_back(it->second + i * nw1 + jp, off + i * nw + j, s * val);
      }
    }
    diffs[n] = SparseMatrix<T>::from_triplets(dimof(n - 1), dimof(n), std::move(trips));
  }
  return BasicChainComplex<T>(std::move(dims), std::move(diffs));
}

/// v (x) w -> (-1)^{|v||w|} w (x) v.
template <class T>
BasicMapChain<T> braiding(const BasicChainComplex<T>& v, const BasicChainComplex<T>& w) {
  auto vw = tensor(v, w);
  auto wv = tensor(w, v);
  BasicMapChain<T> g{vw, wv, 0, {}};
  for (const auto& [n, d] : vw.dims()) {
    auto src = detail::tensor_offsets(v, w, n);
    auto dst = detail::tensor_offsets(w, v, n);
    std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
    for (auto [m, off] : src) {
      const int k = n - m;
      const std::size_t nv = v.dim(m), nw = w.dim(k);
      const std::size_t doff = dst.at(k);
      const T s = ((m * k) % 2 == 0) ? T(1) : T(-1);
      for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nw; ++j) trips.emplace_back(doff + j * nv + i, off + i * nw + j, s);
    }
    g.set(n, SparseMatrix<T>::from_triplets(wv.dim(n), d, std::move(trips)));
  }
  return g;
}

enum class RankMethod { Sparse, Bareiss };

template <class T>
std::size_t rank_by(const SparseMatrix<T>& a, RankMethod method) {
  if constexpr (std::is_same_v<T, Scalar>) {
    if (method == RankMethod::Bareiss) return rank_bareiss(a);
  }
  return rank(a);
}

struct HomologyReport {
  std::map<int, std::size_t> ranks;
  std::size_t rank(int n) const {
    auto it = ranks.find(n);
    return it == ranks.end() ? 0 : it->second;
  }
};

template <class T>
HomologyReport homology_ranks(const BasicChainComplex<T>& c, RankMethod method = RankMethod::Sparse) {
  HomologyReport rep;
  std::map<int, std::size_t> dr;
  for (int n : c.degrees()) dr[n] = rank_by(c.diff(n), method);
  auto r = [&](int n) {
    auto it = dr.find(n);
    return it == dr.end() ? std::size_t{0} : it->second;
  };
  for (int n : c.degrees()) rep.ranks[n] = c.dim(n) - r(n) - r(n + 1);
  return rep;
}

/// Vectors kept in reduced echelon form; insertion reports whether the span grew.
template <class T>
class EchelonSpan {
 public:
  explicit EchelonSpan(std::size_t n) : n_(n), pivot_of_(n, -1) {}

  bool insert(std::vector<T> v) {
    if (v.size() != n_) throw ShapeMismatch("span vector size");
    reduce(v);
    for (std::size_t c = 0; c < n_; ++c)
      if (!is_zero(v[c])) {
        typename SparseMatrix<T>::Row row;
        for (std::size_t k = c; k < n_; ++k)
          if (!is_zero(v[k])) row.emplace_back(k, v[k]);
        pivot_of_[c] = static_cast<long long>(rows_.size());
        rows_.push_back(std::move(row));
        return true;
      }
    return false;
  }

  bool contains(std::vector<T> v) const {
    reduce(v);
    for (const auto& x : v)
      if (!is_zero(x)) return false;
    return true;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  void reduce(std::vector<T>& v) const {
    for (std::size_t c = 0; c < n_; ++c) {
      if (is_zero(v[c]) || pivot_of_[c] < 0) continue;
      const auto& row = rows_[static_cast<std::size_t>(pivot_of_[c])];
      T f = v[c] / row.front().second;
      for (const auto& [k, val] : row) v[k] -= f * val;
    }
  }

  std::size_t n_;
  std::vector<long long> pivot_of_;
  std::vector<typename SparseMatrix<T>::Row> rows_;
};

/// Cycles whose classes form a basis of H_n.
template <class T>
std::vector<std::vector<T>> homology_representatives(const BasicChainComplex<T>& c, int n) {
  const std::size_t d = c.dim(n);
  EchelonSpan<T> span(d);
  auto b = c.diff(n + 1).transpose();
  for (std::size_t r = 0; r < b.rows(); ++r) {
    std::vector<T> v(d);
    for (const auto& [k, val] : b.row(r)) v[k] = val;
    span.insert(std::move(v));
  }
  std::vector<std::vector<T>> reps;
  for (auto& z : kernel_basis(c.diff(n)))
    if (span.insert(z)) reps.push_back(std::move(z));
  return reps;
}

struct QuasiIsoReport {
  bool quasi_iso = true;
  std::map<int, std::size_t> source_ranks, target_ranks, induced_ranks;
};

/// Induced rank per degree: rank[f Z_n | B_n(W)] - rank B_n(W).
template <class T>
QuasiIsoReport quasi_iso_report(const BasicMapChain<T>& f) {
  if (f.degree != 0) throw ShapeMismatch("quasi-isomorphism test needs a degree-0 map");
  QuasiIsoReport rep;
  auto hv = homology_ranks(f.source);
  auto hw = homology_ranks(f.target);
  std::set<int> degs;
  for (int n : f.source.degrees()) degs.insert(n);
  for (int n : f.target.degrees()) degs.insert(n);
  for (int n : degs) {
    rep.source_ranks[n] = hv.rank(n);
    rep.target_ranks[n] = hw.rank(n);
    std::size_t induced = 0;
    if (hv.rank(n) > 0 && hw.rank(n) > 0) {
      auto bw = f.target.diff(n + 1);
      auto dn = f.source.diff(n);
      // every chain is a cycle when the outgoing differential vanishes
      auto fz = dn.is_zero_matrix() ? f.component(n)
                                    : f.component(n) * columns_matrix(f.source.dim(n), kernel_basis(dn));
      induced = rank(hconcat(fz, bw)) - rank(bw);
    }
    rep.induced_ranks[n] = induced;
    if (induced != hv.rank(n) || induced != hw.rank(n)) rep.quasi_iso = false;
  }
  return rep;
}

template <class T>
bool is_quasi_iso(const BasicMapChain<T>& f) {
  return quasi_iso_report(f).quasi_iso;
}

/// cone(f)_n = V_{n-1} (+) W_n with d(v, w) = (-dv, f v + dw).
template <class T>
BasicChainComplex<T> mapping_cone(const BasicMapChain<T>& f) {
  if (f.degree != 0) throw ShapeMismatch("cone needs a degree-0 map");
  std::map<int, std::size_t> dims;
  std::set<int> degs;
  for (int n : f.source.degrees()) degs.insert(n + 1);
  for (int n : f.target.degrees()) degs.insert(n);
  for (int n : degs) dims[n] = f.source.dim(n - 1) + f.target.dim(n);
  std::map<int, SparseMatrix<T>> diffs;
  for (int n : degs) {
    const std::size_t vr = f.source.dim(n - 2), wr = f.target.dim(n - 1);
    const std::size_t vc = f.source.dim(n - 1), wc = f.target.dim(n);
    if (vr + wr == 0) continue;
    std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
    auto add = [&](const SparseMatrix<T>& m, std::size_t r0, std::size_t c0, const T& s) {
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (const auto& [c, val] : m.row(r)) trips.emplace_back(r0 + r, c0 + c, s * val);
    };
    add(f.source.diff(n - 1), 0, 0, T(-1));
    add(f.component(n - 1), vr, 0, T(1));
    add(f.target.diff(n), vr, vc, T(1));
    diffs[n] = SparseMatrix<T>::from_triplets(vr + wr, vc + wc, std::move(trips));
  }
  return BasicChainComplex<T>(std::move(dims), std::move(diffs));
}

/// f is a quasi-isomorphism iff its cone is acyclic; needs ranks only.
template <class T>
bool cone_acyclic(const BasicMapChain<T>& f) {
  auto h = homology_ranks(mapping_cone(f));
  for (const auto& [n, r] : h.ranks)
    if (r != 0) return false;
  return true;
}

/// Some degree-1 chain with boundary f - g, or nothing when [f - g] != 0.
template <class T>
std::optional<BasicMapChain<T>> find_homotopy(const BasicMapChain<T>& f, const BasicMapChain<T>& g,
                                              std::size_t cap = 20000) {
  if (f.degree != g.degree) throw ShapeMismatch("homotopy between maps of different degree");
  MappingComplex<T> hom(f.source, f.target);
  const int k = f.degree + 1;
  const std::size_t unknowns = hom.dim(k);
  if (unknowns > cap)
    throw DimensionOverflow("homotopy has " + std::to_string(unknowns) + " unknowns, cap " + std::to_string(cap));
  auto rhs = hom.flatten(f - g);
  auto x = solve(hom.boundary_matrix(k), rhs);
  if (!x) return std::nullopt;
  return hom.unflatten(*x, k);
}

}  // namespace hqft
