#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hqft/core/scalar.hpp"

namespace hqft {

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-compressed sparse matrix; every row is sorted by column with no stored zeros.
template <class T>
class SparseMatrix {
 public:
  using Entry = std::pair<std::size_t, T>;
  using Row = std::vector<Entry>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows) {}

  static SparseMatrix identity(std::size_t n, const T& diag = T(1)) {
    SparseMatrix m(n, n);
    if (!is_zero(diag))
      for (std::size_t i = 0; i < n; ++i) m.data_[i].emplace_back(i, diag);
    return m;
  }

  /// Sums duplicate (row, col) entries.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<std::tuple<std::size_t, std::size_t, T>> trips) {
    SparseMatrix m(rows, cols);
    std::sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    for (auto& [r, c, v] : trips) {
      if (r >= rows || c >= cols) throw ShapeMismatch("triplet out of range");
      auto& row = m.data_[r];
      if (!row.empty() && row.back().first == c)
        row.back().second += v;
      else
        row.emplace_back(c, std::move(v));
    }
    for (auto& row : m.data_)
      row.erase(std::remove_if(row.begin(), row.end(), [](const Entry& e) { return is_zero(e.second); }),
                row.end());
    return m;
  }

  static SparseMatrix from_dense(const std::vector<std::vector<T>>& d, std::size_t cols) {
    SparseMatrix m(d.size(), cols);
    for (std::size_t r = 0; r < d.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (!is_zero(d[r][c])) m.data_[r].emplace_back(c, d[r][c]);
    return m;
  }

  std::size_t rows() const { return data_.size(); }
  std::size_t cols() const { return cols_; }
  const Row& row(std::size_t r) const { return data_[r]; }
  Row& mutable_row(std::size_t r) { return data_[r]; }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : data_) n += r.size();
    return n;
  }

  bool is_zero_matrix() const {
    for (const auto& r : data_)
      if (!r.empty()) return false;
    return true;
  }

  T get(std::size_t r, std::size_t c) const {
    const auto& row = data_.at(r);
    auto it = std::lower_bound(row.begin(), row.end(), c, [](const Entry& e, std::size_t k) { return e.first < k; });
    if (it != row.end() && it->first == c) return it->second;
    return T(0);
  }

  void set(std::size_t r, std::size_t c, const T& v) {
    if (r >= rows() || c >= cols_) throw ShapeMismatch("set out of range");
    auto& row = data_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c, [](const Entry& e, std::size_t k) { return e.first < k; });
    if (it != row.end() && it->first == c) {
      if (is_zero(v))
        row.erase(it);
      else
        it->second = v;
    } else if (!is_zero(v)) {
      row.insert(it, Entry(c, v));
    }
  }

  void add_to(std::size_t r, std::size_t c, const T& v) { set(r, c, get(r, c) + v); }

  SparseMatrix transpose() const {
    SparseMatrix t(cols_, rows());
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& [c, v] : data_[r]) t.data_[c].emplace_back(r, v);
    return t;
  }

  SparseMatrix operator*(const SparseMatrix& b) const {
    if (cols_ != b.rows()) throw ShapeMismatch("product shape mismatch");
    SparseMatrix out(rows(), b.cols());
    std::vector<T> acc(b.cols());
    std::vector<char> used(b.cols(), 0);
    std::vector<std::size_t> touched;
    for (std::size_t r = 0; r < rows(); ++r) {
      touched.clear();
      for (const auto& [k, av] : data_[r])
        for (const auto& [c, bv] : b.data_[k]) {
          if (!used[c]) {
            used[c] = 1;
            acc[c] = av * bv;
            touched.push_back(c);
          } else {
            acc[c] += av * bv;
          }
        }
      std::sort(touched.begin(), touched.end());
      auto& orow = out.data_[r];
      for (std::size_t c : touched) {
        if (!is_zero(acc[c])) orow.emplace_back(c, acc[c]);
        used[c] = 0;
      }
    }
    return out;
  }

  std::vector<T> apply(const std::vector<T>& x) const {
    if (x.size() != cols_) throw ShapeMismatch("apply shape mismatch");
    std::vector<T> y(rows());
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& [c, v] : data_[r]) y[r] += v * x[c];
    return y;
  }

  SparseMatrix operator+(const SparseMatrix& b) const { return combine(b, T(1)); }
  SparseMatrix operator-(const SparseMatrix& b) const { return combine(b, T(-1)); }
  SparseMatrix operator-() const { return scaled(T(-1)); }

  SparseMatrix scaled(const T& s) const {
    SparseMatrix out(rows(), cols_);
    if (is_zero(s)) return out;
    for (std::size_t r = 0; r < rows(); ++r) {
      out.data_[r].reserve(data_[r].size());
      for (const auto& [c, v] : data_[r]) out.data_[r].emplace_back(c, v * s);
    }
    return out;
  }

  bool operator==(const SparseMatrix& b) const {
    if (rows() != b.rows() || cols_ != b.cols_) return false;
    return data_ == b.data_;
  }
  bool operator!=(const SparseMatrix& b) const { return !(*this == b); }

  /// Keeps rows `ri` and columns `ci` in the given order.
  SparseMatrix submatrix(const std::vector<std::size_t>& ri, const std::vector<std::size_t>& ci) const {
    std::vector<long long> colmap(cols_, -1);
    for (std::size_t k = 0; k < ci.size(); ++k) colmap.at(ci[k]) = static_cast<long long>(k);
    SparseMatrix out(ri.size(), ci.size());
    for (std::size_t k = 0; k < ri.size(); ++k) {
      auto& orow = out.data_[k];
      for (const auto& [c, v] : data_.at(ri[k]))
        if (colmap[c] >= 0) orow.emplace_back(static_cast<std::size_t>(colmap[c]), v);
      std::sort(orow.begin(), orow.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    }
    return out;
  }

  /// Places this matrix at (r0, c0) inside a larger zero matrix.
  SparseMatrix embedded(std::size_t rows, std::size_t cols, std::size_t r0, std::size_t c0) const {
    if (r0 + this->rows() > rows || c0 + cols_ > cols) throw ShapeMismatch("embed out of range");
    SparseMatrix out(rows, cols);
    for (std::size_t r = 0; r < this->rows(); ++r)
      for (const auto& [c, v] : data_[r]) out.data_[r0 + r].emplace_back(c0 + c, v);
    return out;
  }

  std::vector<std::vector<T>> dense() const {
    std::vector<std::vector<T>> d(rows(), std::vector<T>(cols_));
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& [c, v] : data_[r]) d[r][c] = v;
    return d;
  }

  template <class U, class F>
  SparseMatrix<U> map(F f) const {
    std::vector<std::tuple<std::size_t, std::size_t, U>> trips;
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& [c, v] : data_[r]) trips.emplace_back(r, c, f(v));
    return SparseMatrix<U>::from_triplets(rows(), cols_, std::move(trips));
  }

 private:
  SparseMatrix combine(const SparseMatrix& b, const T& sb) const {
    if (rows() != b.rows() || cols_ != b.cols_) throw ShapeMismatch("sum shape mismatch");
    SparseMatrix out(rows(), cols_);
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto& x = data_[r];
      const auto& y = b.data_[r];
      auto& o = out.data_[r];
      std::size_t i = 0, j = 0;
      while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
          o.push_back(x[i++]);
        } else if (i == x.size() || y[j].first < x[i].first) {
          o.emplace_back(y[j].first, y[j].second * sb);
          ++j;
        } else {
          T v = x[i].second + y[j].second * sb;
          if (!is_zero(v)) o.emplace_back(x[i].first, std::move(v));
          ++i;
          ++j;
        }
      }
    }
    return out;
  }

  std::size_t cols_ = 0;
  std::vector<Row> data_;
};

using Matrix = SparseMatrix<Scalar>;
using GMatrix = SparseMatrix<Gaussian>;

inline GMatrix complexify(const Matrix& m) {
  return m.map<Gaussian>([](const Scalar& v) { return Gaussian(v); });
}

/// Horizontal block concatenation [A | B].
template <class T>
SparseMatrix<T> hconcat(const SparseMatrix<T>& a, const SparseMatrix<T>& b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("hconcat rows");
  SparseMatrix<T> out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto& o = out.mutable_row(r);
    o = a.row(r);
    for (const auto& [c, v] : b.row(r)) o.emplace_back(a.cols() + c, v);
  }
  return out;
}

}  // namespace hqft
