#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqft/core/linalg.hpp"
#include "hqft/lattice/lattice.hpp"
#include "json.hpp"

namespace hqft {

struct SingularBlock : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SupportViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Orientation { Retarded, Advanced };

inline const char* to_string(Orientation o) { return o == Orientation::Retarded ? "retarded" : "advanced"; }

/// P = box_p - mass^2 on p-cochains.
inline Matrix wave_operator(const Lattice& l, int p, const Scalar& mass) {
  return l.box(p) - Matrix::identity(l.num_cells(p), mass * mass);
}

namespace detail {

/// Cells grouped by half-unit time position.
inline std::map<int, std::vector<std::size_t>> cells_by_position(const Lattice& l, int p) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < l.num_cells(p); ++i) out[l.position(p, i)].push_back(i);
  return out;
}

inline std::vector<std::vector<Scalar>> dense_inverse(std::vector<std::vector<Scalar>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<Scalar>> inv(n, std::vector<Scalar>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && sgn(a[piv][c]) == 0) ++piv;
    if (piv == n) throw SingularBlock("time block is not invertible");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    Scalar s = 1 / a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] *= s;
      inv[c][k] *= s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(a[r][c]) == 0) continue;
      Scalar f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Retarded or advanced inverse of P by time-ordered block substitution.
///
/// Retarded: the unknowns at the two earliest half-unit positions are zero, and the rows at
/// position r (all but the last two positions) determine the unknowns at r + 2.
/// Advanced is the time mirror. Inputs must vanish on the outermost `margin` slices.
class GreenOperator {
 public:
  GreenOperator(std::shared_ptr<const Lattice> l, int p, Scalar mass, Orientation o, int margin = 1)
      : l_(std::move(l)), p_(p), mass_(std::move(mass)), orient_(o), margin_(margin) {
    if (p_ < 0 || p_ > 2) throw BadDims("form degree out of range");
    op_ = wave_operator(*l_, p_, mass_);
    byPos_ = detail::cells_by_position(*l_, p_);
    build();
  }

  int degree() const { return p_; }
  const Scalar& mass() const { return mass_; }
  Orientation orientation() const { return orient_; }
  int margin() const { return margin_; }
  const Lattice& lattice() const { return *l_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return l_; }
  const Matrix& op() const { return op_; }
  const Matrix& matrix() const { return g_; }

  /// Every vertex of every supporting cell lies in slices [m, Nt-1-m].
  bool in_window(const std::vector<Scalar>& phi, int m) const {
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (!is_zero(phi[i]) && !cell_in_window(i, m)) return false;
    return true;
  }

  bool cell_in_window(std::size_t i, int m) const {
    for (auto v : l_->cell_vertices(p_, i)) {
      int t = int(v) / l_->nx();
      if (t < m || t > l_->nt() - 1 - m) return false;
    }
    return true;
  }

  std::vector<std::size_t> window_cells(int m) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < l_->num_cells(p_); ++i)
      if (cell_in_window(i, m)) out.push_back(i);
    return out;
  }

  std::vector<Scalar> apply(const std::vector<Scalar>& phi) const {
    if (phi.size() != l_->num_cells(p_)) throw ShapeMismatch("green input size");
    if (!in_window(phi, margin_))
      throw SupportViolation("input touches the outermost " + std::to_string(margin_) + " slice(s)");
    return g_.apply(phi);
  }

  /// Unchecked block substitution (rows outside the solve range are ignored).
  std::vector<Scalar> solve(const std::vector<Scalar>& phi) const {
    std::vector<Scalar> u(l_->num_cells(p_));
    const bool ret = orient_ == Orientation::Retarded;
    const int step = ret ? 2 : -2;
    for (const auto& blk : blocks_) {
      const auto& rows = byPos_.at(blk.pos);
      const auto& cols = byPos_.at(blk.pos + step);
      std::vector<Scalar> rhs(rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a) {
        rhs[a] = phi[rows[a]];
        for (const auto& [c, v] : op_.row(rows[a]))
          if (l_->position(p_, c) != blk.pos + step) rhs[a] -= v * u[c];
      }
      for (std::size_t a = 0; a < cols.size(); ++a) {
        Scalar s = 0;
        for (std::size_t b = 0; b < rows.size(); ++b)
          if (!is_zero(blk.inv[a][b]) && !is_zero(rhs[b])) s += blk.inv[a][b] * rhs[b];
        u[cols[a]] = s;
      }
    }
    return u;
  }

  /// Replaces the memoized matrix; used to build falsification fixtures.
  GreenOperator with_matrix(Matrix g) const {
    GreenOperator out = *this;
    out.g_ = std::move(g);
    return out;
  }

 private:
  struct Block {
    int pos;
    std::vector<std::vector<Scalar>> inv;
  };

  void build() {
    const int lo = byPos_.begin()->first, hi = byPos_.rbegin()->first;
    const bool ret = orient_ == Orientation::Retarded;
    const int step = ret ? 2 : -2;
    std::vector<int> order;
    if (ret)
      for (int r = lo; r <= hi - 2; ++r) order.push_back(r);
    else
      for (int r = hi; r >= lo + 2; --r) order.push_back(r);
    for (int r : order) {
      auto rit = byPos_.find(r);
      if (rit == byPos_.end()) continue;
      const auto& rows = rit->second;
      auto cit = byPos_.find(r + step);
      if (cit == byPos_.end() || cit->second.size() != rows.size())
        throw SingularBlock("time block at position " + std::to_string(r) + " is not square");
      const auto& cols = cit->second;
      for (auto row : rows)
        for (const auto& [c, v] : op_.row(row)) {
          int pc = l_->position(p_, c);
          if (ret ? pc > r + 2 : pc < r - 2)
            throw SingularBlock("operator couples beyond the next block at position " + std::to_string(r));
        }
      std::vector<std::vector<Scalar>> b(rows.size(), std::vector<Scalar>(cols.size()));
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t k = 0; k < cols.size(); ++k) b[a][k] = op_.get(rows[a], cols[k]);
      blocks_.push_back({r, detail::dense_inverse(std::move(b))});
    }
    const std::size_t n = l_->num_cells(p_);
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trips;
    for (std::size_t j = 0; j < n; ++j) {
      int pj = l_->position(p_, j);
      if (ret ? pj > hi - 2 : pj < lo + 2) continue;
      std::vector<Scalar> e(n);
      e[j] = 1;
      auto u = solve(e);
      for (std::size_t i = 0; i < n; ++i)
        if (!is_zero(u[i])) trips.emplace_back(i, j, u[i]);
    }
    g_ = Matrix::from_triplets(n, n, std::move(trips));
  }

  std::shared_ptr<const Lattice> l_;
  int p_;
  Scalar mass_;
  Orientation orient_;
  int margin_;
  Matrix op_;
  Matrix g_;
  std::map<int, std::vector<std::size_t>> byPos_;
  std::vector<Block> blocks_;
};

inline GreenOperator green_operator(std::shared_ptr<const Lattice> l, int p, const Scalar& mass, Orientation o,
                                    int margin = 1) {
  return GreenOperator(std::move(l), p, mass, o, margin);
}

/// G = G+ - G- on p-cochains.
struct CausalPropagator {
  GreenOperator ret, adv;
  Matrix matrix() const { return ret.matrix() - adv.matrix(); }
  std::vector<Scalar> apply(const std::vector<Scalar>& phi) const {
    auto a = ret.apply(phi), b = adv.apply(phi);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
  }
};

inline CausalPropagator causal_propagator(std::shared_ptr<const Lattice> l, int p, const Scalar& mass,
                                          int margin = 1) {
  return {GreenOperator(l, p, mass, Orientation::Retarded, margin),
          GreenOperator(l, p, mass, Orientation::Advanced, margin)};
}

struct AxiomFailure {
  std::size_t input_index;
  std::size_t witness_entry;
};

struct AxiomResult {
  std::string axiom;
  std::size_t basis_size = 0;
  std::vector<AxiomFailure> failures;
  bool passed() const { return failures.empty(); }
};

struct GreenReport {
  std::vector<AxiomResult> axioms;
  bool passed() const {
    for (const auto& a : axioms)
      if (!a.passed()) return false;
    return true;
  }
  const AxiomResult& get(const std::string& name) const {
    for (const auto& a : axioms)
      if (a.axiom == name) return a;
    throw std::out_of_range("no axiom " + name);
  }
};

inline nlohmann::json to_json(const AxiomResult& a) {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& x : a.failures) f.push_back({{"input_index", x.input_index}, {"witness_entry", x.witness_entry}});
  return {{"axiom", a.axiom}, {"basis_size", a.basis_size}, {"failures", f}};
}

inline nlohmann::json to_json(const GreenReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : r.axioms) j.push_back(to_json(a));
  return j;
}

namespace detail {

inline std::optional<std::size_t> first_difference(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return i;
  return std::nullopt;
}

inline std::vector<Scalar> unit(std::size_t n, std::size_t i) {
  std::vector<Scalar> e(n);
  e[i] = 1;
  return e;
}

}  // namespace detail

/// Green axioms for a retarded/advanced pair on the full basis of the domain window.
///
/// Axioms: "GP=id" (inputs with one extra slice of margin), "PG=id" (rows of the domain window),
/// "support" (output vertices inside J+- of the input support), "adjoint" (<e_i, G+ e_j> = <G- e_i, e_j>),
/// "skew" (G = G+ - G- is skew for the metric pairing). Optional neighbours in degree p-1 and p+1
/// add "dG=Gd" and "deltaG=Gdelta" for both orientations, compared on the degree-p domain window
/// (the last time layer only solves the boundary rows of the truncated lattice).
inline GreenReport verify_green_axioms(const GreenOperator& gp, const GreenOperator& gm,
                                       const GreenOperator* lower_p = nullptr, const GreenOperator* lower_m = nullptr,
                                       const GreenOperator* upper_p = nullptr,
                                       const GreenOperator* upper_m = nullptr) {
  const Lattice& l = gp.lattice();
  const int p = gp.degree();
  const std::size_t n = l.num_cells(p);
  const int k = gp.margin();
  const Matrix& P = gp.op();
  GreenReport rep;

  auto window = gp.window_cells(k);
  auto inner = gp.window_cells(k + 1);

  for (const GreenOperator* g : {&gp, &gm}) {
    std::string tag = g->orientation() == Orientation::Retarded ? "+" : "-";
    AxiomResult gpid{"G" + tag + "P=id", inner.size(), {}};
    for (std::size_t idx = 0; idx < inner.size(); ++idx) {
      auto e = detail::unit(n, inner[idx]);
      auto out = g->matrix().apply(P.apply(e));
      if (auto w = detail::first_difference(out, e)) gpid.failures.push_back({inner[idx], *w});
    }
    rep.axioms.push_back(gpid);

    AxiomResult pgid{"PG" + tag + "=id", window.size(), {}};
    for (std::size_t idx = 0; idx < window.size(); ++idx) {
      auto e = detail::unit(n, window[idx]);
      auto out = P.apply(g->matrix().apply(e));
      for (auto row : window)
        if (out[row] != e[row]) {
          pgid.failures.push_back({window[idx], row});
          break;
        }
    }
    rep.axioms.push_back(pgid);

    AxiomResult supp{"support" + tag, window.size(), {}};
    const Direction dir = g->orientation() == Orientation::Retarded ? Direction::Future : Direction::Past;
    for (std::size_t idx = 0; idx < window.size(); ++idx) {
      auto e = detail::unit(n, window[idx]);
      auto cone = l.causal_cone(l.support(p, e), dir);
      auto out = g->matrix().apply(e);
      for (std::size_t i = 0; i < n; ++i) {
        if (is_zero(out[i])) continue;
        bool ok = true;
        for (auto v : l.cell_vertices(p, i)) ok = ok && cone[v];
        if (!ok) {
          supp.failures.push_back({window[idx], i});
          break;
        }
      }
    }
    rep.axioms.push_back(supp);
  }

  // <e_i, G+ e_j> = <G- e_i, e_j>  <=>  H G+ = (G-)^T H on the window block
  const auto& h = l.metric(p);
  AxiomResult adj{"adjoint", window.size(), {}};
  AxiomResult skew{"skew", window.size(), {}};
  Matrix gpm = gp.matrix(), gmm = gm.matrix();
  for (auto j : window) {
    bool adj_bad = false, skew_bad = false;
    for (auto i : window) {
      Scalar lhs = h[i] * gpm.get(i, j);
      Scalar rhs = gmm.get(j, i) * h[j];
      if (!adj_bad && lhs != rhs) {
        adj.failures.push_back({j, i});
        adj_bad = true;
      }
      Scalar gij = gpm.get(i, j) - gmm.get(i, j);
      Scalar gji = gpm.get(j, i) - gmm.get(j, i);
      if (!skew_bad && h[i] * gij != -(gji * h[j])) {
        skew.failures.push_back({j, i});
        skew_bad = true;
      }
    }
  }
  rep.axioms.push_back(adj);
  rep.axioms.push_back(skew);

  // commutation: d_{p-1} G_{p-1} = G_p d_{p-1} and delta_{p+1} G_{p+1} = G_p delta_{p+1}
  auto commute = [&](const std::string& name, const Matrix& lhs_op, const GreenOperator& g_src,
                     const GreenOperator& g_dst, const Matrix& rhs_op) {
    auto inputs = g_src.window_cells(k + 1);
    AxiomResult r{name, inputs.size(), {}};
    const std::size_t ns = l.num_cells(g_src.degree());
    auto out_cells = g_dst.window_cells(k);
    for (auto j : inputs) {
      auto e = detail::unit(ns, j);
      auto a = lhs_op.apply(g_src.matrix().apply(e));
      auto b = g_dst.matrix().apply(rhs_op.apply(e));
      for (auto i : out_cells)
        if (a[i] != b[i]) {
          r.failures.push_back({j, i});
          break;
        }
    }
    rep.axioms.push_back(r);
  };
  if (lower_p && lower_m) {
    const Matrix& d = l.d(p - 1);
    commute("dG+=G+d", d, *lower_p, gp, d);
    commute("dG-=G-d", d, *lower_m, gm, d);
  }
  if (upper_p && upper_m) {
    const Matrix& del = l.delta(p + 1);
    commute("deltaG+=G+delta", del, *upper_p, gp, del);
    commute("deltaG-=G-delta", del, *upper_m, gm, del);
  }
  return rep;
}

}  // namespace hqft
