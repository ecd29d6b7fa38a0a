#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hqft/lattice/lattice.hpp"

namespace hqft {

/// Cells of one form degree whose half-unit time position lies in [lo, hi].
///
/// A hard side means cochains vanish beyond it (extension by zero); a soft side means values
/// beyond it are discarded (quotient).
struct Window {
  int form = 0;
  int lo = 0, hi = -1;
  bool hard_lo = true, hard_hi = true;

  static Window hard(int form, int lo, int hi) { return {form, lo, hi, true, true}; }
  static Window soft(int form, int lo, int hi) { return {form, lo, hi, false, false}; }
  static Window past_compact(int form, int lo, int hi) { return {form, lo, hi, true, false}; }
  static Window future_compact(int form, int lo, int hi) { return {form, lo, hi, false, true}; }

  /// Time reflection p -> 2(Nt-1) - p, swapping the side kinds.
  Window mirrored(const Lattice& l) const {
    const int top = 2 * (l.nt() - 1);
    return {form, top - hi, top - lo, hard_hi, hard_lo};
  }

  bool contains(const Lattice& l, std::size_t cell) const {
    int p = l.position(form, cell);
    return p >= lo && p <= hi;
  }

  /// Position beyond a hard side.
  bool beyond_hard(int pos) const { return (hard_lo && pos < lo) || (hard_hi && pos > hi); }
  bool beyond_soft(int pos) const { return (!hard_lo && pos < lo) || (!hard_hi && pos > hi); }

  std::vector<std::size_t> cells(const Lattice& l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < l.num_cells(form); ++i)
      if (contains(l, i)) out.push_back(i);
    return out;
  }

  std::string describe() const {
    return "form " + std::to_string(form) + " " + (hard_lo ? "[" : "(") + std::to_string(lo) + "," +
           std::to_string(hi) + (hard_hi ? "]" : ")");
  }
};

/// Restriction of a lattice operator M : C^a -> C^b to windows A -> B.
inline Matrix restrict_operator(const Lattice& l, const Matrix& m, const Window& a, const Window& b) {
  return m.submatrix(b.cells(l), a.cells(l));
}

/// Identity of cochains between two windows of the same form.
inline Matrix window_inclusion(const Lattice& l, const Window& a, const Window& b) {
  if (a.form != b.form) throw ShapeMismatch("inclusion between windows of different form");
  return restrict_operator(l, Matrix::identity(l.num_cells(a.form)), a, b);
}

/// First (row, col) of M breaking well-definedness of its window restriction A -> B, if any.
///
/// Rows of B may read columns outside A only beyond a hard side of A (those values vanish), and
/// columns of A may write rows outside B only beyond a soft side of B (those values are discarded).
inline std::optional<std::pair<std::size_t, std::size_t>> restriction_witness(const Lattice& l, const Matrix& m,
                                                                              const Window& a, const Window& b) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const bool row_in = b.contains(l, r);
    const int rp = l.position(b.form, r);
    for (const auto& [c, v] : m.row(r)) {
      const bool col_in = a.contains(l, c);
      if (row_in && !col_in && !a.beyond_hard(l.position(a.form, c))) return std::make_pair(r, c);
      if (col_in && !row_in && !b.beyond_soft(rp)) return std::make_pair(r, c);
    }
  }
  return std::nullopt;
}

}  // namespace hqft
