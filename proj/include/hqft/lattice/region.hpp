#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqft/lattice/lattice.hpp"

namespace hqft {

struct NotCausallyConvex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// TimeSlab: slices [t0, t1] over the full circle.
/// Diamond: J+(apex) intersected with J-(apex shifted 2*radius slices later); apex is the past tip.
struct Region {
  enum class Kind { TimeSlab, Diamond };
  Kind kind = Kind::TimeSlab;
  int t0 = 0, t1 = 0;
  int apex_t = 0, apex_x = 0, radius = 0;

  static Region slab(int t0, int t1) { return {Kind::TimeSlab, t0, t1, 0, 0, 0}; }
  static Region diamond(int apex_t, int apex_x, int radius) { return {Kind::Diamond, 0, 0, apex_t, apex_x, radius}; }

  std::string describe() const {
    if (kind == Kind::TimeSlab) return "slab[" + std::to_string(t0) + "," + std::to_string(t1) + "]";
    return "diamond(" + std::to_string(apex_t) + "," + std::to_string(apex_x) + ";r=" + std::to_string(radius) + ")";
  }

  bool operator==(const Region& o) const {
    return kind == o.kind && t0 == o.t0 && t1 == o.t1 && apex_t == o.apex_t && apex_x == o.apex_x &&
           radius == o.radius;
  }
};

inline VertexSet region_vertices(const Lattice& l, const Region& r) {
  if (r.kind == Region::Kind::TimeSlab) {
    if (r.t0 < 0 || r.t1 >= l.nt() || r.t0 > r.t1) throw BadDims("slab outside the lattice: " + r.describe());
    auto s = l.empty_set();
    for (int t = r.t0; t <= r.t1; ++t)
      for (int x = 0; x < l.nx(); ++x) s[l.vertex(t, x)] = 1;
    return s;
  }
  int top = r.apex_t + 2 * r.radius;
  if (r.apex_t < 0 || r.radius < 0 || top >= l.nt()) throw BadDims("diamond outside the lattice: " + r.describe());
  auto fut = l.causal_cone(l.singleton(l.vertex(r.apex_t, r.apex_x)), Direction::Future);
  auto past = l.causal_cone(l.singleton(l.vertex(top, r.apex_x)), Direction::Past);
  auto s = l.empty_set();
  for (std::size_t v = 0; v < s.size(); ++v) s[v] = fut[v] && past[v];
  return s;
}

/// J+(S) and J-(S) meet exactly in S.
inline bool is_causally_convex(const Lattice& l, const VertexSet& s) {
  auto fut = l.causal_cone(s, Direction::Future);
  auto past = l.causal_cone(s, Direction::Past);
  for (std::size_t v = 0; v < s.size(); ++v)
    if (fut[v] && past[v] && !s[v]) return false;
  return true;
}

/// Per-degree cell lists of a region with restriction and extension-by-zero matrices.
struct RegionMaps {
  std::array<std::vector<std::size_t>, 3> cells;
  std::array<Matrix, 3> restriction;  // |R_p| x N_p
  std::array<Matrix, 3> extension;    // N_p x |R_p|

  /// Coboundary of the region's own cochain complex.
  Matrix local_d(const Lattice& l, int p) const { return l.d(p).submatrix(cells[p + 1], cells[p]); }
};

inline RegionMaps region_maps(const Lattice& l, const Region& r) {
  auto verts = region_vertices(l, r);
  if (!is_causally_convex(l, verts)) throw NotCausallyConvex(r.describe());
  RegionMaps m;
  for (int p = 0; p < 3; ++p) {
    m.cells[p] = l.cells_in(p, verts);
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (std::size_t k = 0; k < m.cells[p].size(); ++k) t.emplace_back(k, m.cells[p][k], Scalar(1));
    m.restriction[p] = Matrix::from_triplets(m.cells[p].size(), l.num_cells(p), std::move(t));
    m.extension[p] = m.restriction[p].transpose();
  }
  return m;
}

/// J+(R1) and J-(R1) both miss R2.
inline bool causally_disjoint(const Lattice& l, const VertexSet& a, const VertexSet& b) {
  auto fut = l.causal_cone(a, Direction::Future);
  auto past = l.causal_cone(a, Direction::Past);
  for (std::size_t v = 0; v < b.size(); ++v)
    if (b[v] && (fut[v] || past[v])) return false;
  return true;
}

inline bool causally_disjoint(const Lattice& l, const Region& a, const Region& b) {
  return causally_disjoint(l, region_vertices(l, a), region_vertices(l, b));
}

/// Some full time slice lies in the region.
inline bool contains_cauchy_slice(const Lattice& l, const VertexSet& s) {
  for (int t = 0; t < l.nt(); ++t) {
    bool all = true;
    for (int x = 0; x < l.nx(); ++x) all = all && s[l.vertex(t, x)];
    if (all) return true;
  }
  return false;
}

inline bool contains_cauchy_slice(const Lattice& l, const Region& r) {
  return contains_cauchy_slice(l, region_vertices(l, r));
}

}  // namespace hqft
