#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "hqft/core/sparse.hpp"

namespace hqft {

/// Sparse Gaussian elimination with a Markowitz-style pivot rule.
/// Columns at index >= pivot_limit are carried along but never chosen as pivots.
template <class T>
class SparseEliminator {
 public:
  using Row = typename SparseMatrix<T>::Row;

  struct Pivot {
    std::size_t col;
    Row row;  // pivot row at the moment it was chosen
  };

  SparseEliminator(const SparseMatrix<T>& a, std::size_t pivot_limit) : ncols_(a.cols()), limit_(pivot_limit) {
    rows_.reserve(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) rows_.push_back(a.row(r));
    run();
  }

  explicit SparseEliminator(const SparseMatrix<T>& a) : SparseEliminator(a, a.cols()) {}

  std::size_t rank() const { return pivots_.size(); }
  const std::vector<Pivot>& pivots() const { return pivots_; }
  /// Rows left with entries only in non-pivotable columns.
  const std::vector<Row>& residual_rows() const { return residual_; }

  /// Back substitution; columns without a pivot take the values in `free_values`.
  std::vector<T> back_substitute(const std::vector<T>& free_values) const {
    std::vector<T> x = free_values;
    for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
      T acc(0);
      T pv(0);
      for (const auto& [c, v] : it->row) {
        if (c == it->col)
          pv = v;
        else if (c < x.size())
          acc += v * x[c];
      }
      x[it->col] = -acc / pv;
    }
    return x;
  }

 private:
  void run() {
    const std::size_t m = rows_.size();
    col_rows_.assign(ncols_, {});
    col_count_.assign(ncols_, 0);
    alive_.assign(m, 1);
    using Item = std::pair<std::size_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (std::size_t r = 0; r < m; ++r) {
      for (const auto& e : rows_[r]) {
        col_rows_[e.first].push_back(r);
        ++col_count_[e.first];
      }
      heap.emplace(pivot_len(r), r);
    }
    while (!heap.empty()) {
      auto [len, r] = heap.top();
      heap.pop();
      if (!alive_[r] || len != pivot_len(r)) continue;
      if (len == 0) {
        alive_[r] = 0;
        drop_counts(r);
        if (!rows_[r].empty()) residual_.push_back(rows_[r]);
        continue;
      }
      std::size_t best = ncols_;
      std::size_t best_count = 0;
      for (const auto& e : rows_[r]) {
        if (e.first >= limit_) continue;
        if (best == ncols_ || col_count_[e.first] < best_count) {
          best = e.first;
          best_count = col_count_[e.first];
        }
      }
      alive_[r] = 0;
      drop_counts(r);
      const Row& prow = rows_[r];
      T pval(0);
      for (const auto& e : prow)
        if (e.first == best) pval = e.second;
      std::vector<std::size_t> targets;
      targets.swap(col_rows_[best]);
      for (std::size_t i : targets) {
        if (i == r || !alive_[i]) continue;
        T coef(0);
        bool has = false;
        for (const auto& e : rows_[i])
          if (e.first == best) {
            coef = e.second;
            has = true;
            break;
          }
        if (!has) continue;
        eliminate(i, prow, coef / pval);
        heap.emplace(pivot_len(i), i);
      }
      pivots_.push_back({best, prow});
    }
  }

  std::size_t pivot_len(std::size_t r) const {
    std::size_t n = 0;
    for (const auto& e : rows_[r])
      if (e.first < limit_) ++n;
    return n;
  }

  void drop_counts(std::size_t r) {
    for (const auto& e : rows_[r]) --col_count_[e.first];
  }

  // rows_[i] -= f * p
  void eliminate(std::size_t i, const Row& p, const T& f) {
    Row& x = rows_[i];
    Row out;
    out.reserve(x.size() + p.size());
    std::size_t a = 0, b = 0;
    while (a < x.size() || b < p.size()) {
      if (b == p.size() || (a < x.size() && x[a].first < p[b].first)) {
        out.push_back(std::move(x[a++]));
      } else if (a == x.size() || p[b].first < x[a].first) {
        T v = -(f * p[b].second);
        col_rows_[p[b].first].push_back(i);
        ++col_count_[p[b].first];
        out.emplace_back(p[b].first, std::move(v));
        ++b;
      } else {
        T v = x[a].second - f * p[b].second;
        if (is_zero(v))
          --col_count_[x[a].first];
        else
          out.emplace_back(x[a].first, std::move(v));
        ++a;
        ++b;
      }
    }
    x.swap(out);
  }

  std::size_t ncols_;
  std::size_t limit_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::size_t>> col_rows_;
  std::vector<std::size_t> col_count_;
  std::vector<char> alive_;
  std::vector<Pivot> pivots_;
  std::vector<Row> residual_;
};

template <class T>
bool is_zero_vec(const std::vector<T>& v) {
  for (const auto& x : v)
    if (!is_zero(x)) return false;
  return true;
}

template <class T>
std::size_t rank(const SparseMatrix<T>& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return SparseEliminator<T>(a).rank();
}

/// Some x with a x = b, or nothing when the system is inconsistent.
template <class T>
std::optional<std::vector<T>> solve(const SparseMatrix<T>& a, const std::vector<T>& b) {
  if (b.size() != a.rows()) throw ShapeMismatch("solve rhs size");
  const std::size_t n = a.cols();
  SparseMatrix<T> aug(a.rows(), n + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto& row = aug.mutable_row(r);
    row = a.row(r);
    if (!is_zero(b[r])) row.emplace_back(n, -b[r]);
  }
  SparseEliminator<T> el(aug, n);
  if (!el.residual_rows().empty()) return std::nullopt;
  std::vector<T> free(n + 1);
  free[n] = T(1);
  auto x = el.back_substitute(free);
  x.pop_back();
  return x;
}

/// Basis of the kernel of a, one vector per non-pivot column.
template <class T>
std::vector<std::vector<T>> kernel_basis(const SparseMatrix<T>& a) {
  const std::size_t n = a.cols();
  std::vector<std::vector<T>> basis;
  if (n == 0) return basis;
  SparseEliminator<T> el(a);
  std::vector<char> is_pivot(n, 0);
  for (const auto& p : el.pivots()) is_pivot[p.col] = 1;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<T> free(n);
    free[f] = T(1);
    basis.push_back(el.back_substitute(free));
  }
  return basis;
}

/// Matrix whose columns are the given vectors.
template <class T>
SparseMatrix<T> columns_matrix(std::size_t rows, const std::vector<std::vector<T>>& cols) {
  std::vector<std::tuple<std::size_t, std::size_t, T>> trips;
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows; ++r)
      if (!is_zero(cols[c][r])) trips.emplace_back(r, c, cols[c][r]);
  return SparseMatrix<T>::from_triplets(rows, cols.size(), std::move(trips));
}

/// Dense fraction-free (Bareiss) rank over the integers after clearing denominators.
inline std::size_t rank_bareiss(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) return 0;
  std::vector<std::vector<mpz_class>> d(m, std::vector<mpz_class>(n));
  for (std::size_t r = 0; r < m; ++r) {
    mpz_class l = 1;
    for (const auto& [c, v] : a.row(r)) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    for (const auto& [c, v] : a.row(r)) d[r][c] = v.get_num() * (l / v.get_den());
  }
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < m; ++col) {
    std::size_t piv = m;
    for (std::size_t r = rank; r < m; ++r)
      if (sgn(d[r][col]) != 0) {
        piv = r;
        break;
      }
    if (piv == m) continue;
    std::swap(d[piv], d[rank]);
    for (std::size_t r = rank + 1; r < m; ++r) {
      for (std::size_t c = col + 1; c < n; ++c) {
        mpz_class t = d[rank][col] * d[r][c] - d[r][col] * d[rank][c];
        mpz_divexact(d[r][c].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      d[r][col] = 0;
    }
    prev = d[rank][col];
    ++rank;
  }
  return rank;
}

}  // namespace hqft
