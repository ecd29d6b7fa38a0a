#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqft/ccr/ccr.hpp"
#include "hqft/lattice/region.hpp"
#include "hqft/theory/theory.hpp"

namespace hqft {

struct RegionTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NoCauchyInclusion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Slabs [k, Nt-1-k] for each inset k (the full lattice is always region 0) and diamonds of one
/// radius with past tips at (t, x) for every listed t and x = 0, stride, 2*stride, ...
struct PosetParams {
  std::vector<int> slab_insets;
  int diamond_radius = 0;
  std::vector<int> diamond_times;
  int diamond_stride = 1;
};

inline nlohmann::json to_json(const PosetParams& p) {
  return {{"slab_insets", p.slab_insets},
          {"diamond_radius", p.diamond_radius},
          {"diamond_times", p.diamond_times},
          {"diamond_stride", p.diamond_stride}};
}

/// Finite poset of causally convex regions ordered by inclusion; region 0 is terminal.
struct RegionPoset {
  std::shared_ptr<const Lattice> lattice;
  std::vector<Region> regions;
  std::vector<VertexSet> vertices;
  /// Strict inclusions (i, j) with region i inside region j.
  std::vector<std::pair<std::size_t, std::size_t>> inclusions;
  /// disjoint[i][j]: causally disjoint; cauchy[i][j]: i inside j and i contains a Cauchy slice of j.
  std::vector<std::vector<char>> disjoint, cauchy;

  std::size_t size() const { return regions.size(); }
  static constexpr std::size_t terminal() { return 0; }
  bool includes(std::size_t i, std::size_t j) const {
    if (i == j) return true;
    for (const auto& [a, b] : inclusions)
      if (a == i && b == j) return true;
    return false;
  }
};

namespace detail {

inline bool subset(const VertexSet& a, const VertexSet& b) {
  for (std::size_t v = 0; v < a.size(); ++v)
    if (a[v] && !b[v]) return false;
  return true;
}

}  // namespace detail

inline RegionPoset build_region_poset(std::shared_ptr<const Lattice> l, const PosetParams& p) {
  RegionPoset poset;
  poset.lattice = l;
  poset.regions.push_back(Region::slab(0, l->nt() - 1));
  for (int k : p.slab_insets) {
    auto r = Region::slab(k, l->nt() - 1 - k);
    if (r.t1 - r.t0 + 1 < 8) throw RegionTooSmall("slab needs at least 8 slices: " + r.describe());
    if (k <= 0) throw BadDims("slab inset must be positive");
    poset.regions.push_back(r);
  }
  if (p.diamond_radius > 0) {
    if (p.diamond_stride <= 0) throw BadDims("diamond stride must be positive");
    for (int t : p.diamond_times)
      for (int x = 0; x < l->nx(); x += p.diamond_stride) poset.regions.push_back(Region::diamond(t, x, p.diamond_radius));
  } else if (!p.diamond_times.empty()) {
    throw RegionTooSmall("diamonds need a positive radius");
  }
  for (const auto& r : poset.regions) {
    auto v = region_vertices(*l, r);
    if (!is_causally_convex(*l, v)) throw NotCausallyConvex(r.describe());
    poset.vertices.push_back(std::move(v));
  }
  const std::size_t n = poset.regions.size();
  poset.disjoint.assign(n, std::vector<char>(n, 0));
  poset.cauchy.assign(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (poset.regions[i] == poset.regions[j]) throw BadDims("duplicate region " + poset.regions[i].describe());
      poset.disjoint[i][j] = causally_disjoint(*l, poset.vertices[i], poset.vertices[j]);
      if (detail::subset(poset.vertices[i], poset.vertices[j])) {
        poset.inclusions.emplace_back(i, j);
        poset.cauchy[i][j] = poset.regions[i].kind == Region::Kind::TimeSlab &&
                             poset.regions[j].kind == Region::Kind::TimeSlab &&
                             contains_cauchy_slice(*l, poset.vertices[i]);
      }
    }
  return poset;
}

inline nlohmann::json to_json(const RegionPoset& p) {
  nlohmann::json regions = nlohmann::json::array(), inc = nlohmann::json::array();
  for (const auto& r : p.regions) regions.push_back(r.describe());
  for (const auto& [a, b] : p.inclusions) inc.push_back({{"sub", a}, {"super", b}, {"cauchy", bool(p.cauchy[a][b])}});
  return {{"regions", regions}, {"inclusions", inc}};
}

/// Observables of one region. Slabs carry the theory on their own sub-lattice; diamonds are the
/// largest basis subcomplex of their enclosing slab whose cells lie in the diamond.
struct RegionObservables {
  Region region;
  std::optional<std::size_t> parent;  // enclosing slab of a diamond
  int time_offset = 0;
  std::optional<ObservablesComplex> obs;  // slabs only
  ChainComplex L;
  BilinearForm tau;
  /// Ambient lattice cell of each basis vector, per degree.
  std::map<int, std::vector<std::size_t>> cells;
  int form(int n) const { return form_of.at(n); }
  std::map<int, int> form_of;
};

struct RegionFunctor {
  RegionPoset poset;
  TheoryKind kind = TheoryKind::KG;
  Scalar mass;
  std::vector<RegionObservables> regions;
  std::map<std::pair<std::size_t, std::size_t>, MapChain> pushforward;

  const MapChain& push(std::size_t i, std::size_t j) const { return pushforward.at({i, j}); }
  const RegionObservables& ambient() const { return regions.at(RegionPoset::terminal()); }
};

namespace detail {

/// Cell of a slab sub-lattice moved into the ambient lattice by a time shift.
inline std::size_t shift_cell(const Lattice& sub, const Lattice& amb, int form, std::size_t i, int dt) {
  auto [t, x] = sub.cell_tx(form, i);
  if (form == 0) return amb.vertex(t + dt, x);
  if (form == 2) return amb.face(t + dt, x);
  return sub.is_time_edge(i) ? amb.time_edge(t + dt, x) : amb.space_edge(t + dt, x);
}

/// beta(f a, f b) for a degree-0 map f.
inline BilinearForm pullback(const BilinearForm& beta, const MapChain& f) {
  BilinearForm out{f.source, beta.degree, {}};
  for (int m : f.source.degrees()) {
    const int n = beta.degree - m;
    if (f.source.dim(n) == 0) continue;
    const Matrix* b = beta.find_block(m, n);
    if (!b) continue;
    out.set(m, n, f.component(m).transpose() * (*b) * f.component(n));
  }
  return out;
}

inline RegionObservables slab_observables(const Lattice& amb, TheoryKind kind, const Scalar& mass,
                                          const Region& r) {
  RegionObservables ro;
  ro.region = r;
  ro.time_offset = r.t0;
  auto sub = std::make_shared<const Lattice>(r.t1 - r.t0 + 1, amb.nx(), amb.dt(), amb.dx());
  ro.obs = observables_complex(make_theory(kind, sub, mass));
  ro.L = ro.obs->L;
  ro.tau = standard_poisson(*ro.obs).tau;
  for (const auto& [n, w] : ro.obs->spec.obs) {
    ro.form_of[n] = w.form;
    auto& cs = ro.cells[n];
    for (auto c : w.cells(*sub)) cs.push_back(shift_cell(*sub, amb, w.form, c, r.t0));
  }
  return ro;
}

/// Basis vectors of the parent in the diamond, closed downward: a vector is kept when its cell lies
/// in the diamond and its boundary only involves kept vectors.
inline RegionObservables diamond_observables(const Lattice& amb, const RegionObservables& parent,
                                             std::size_t parent_index, const Region& r, const VertexSet& verts) {
  RegionObservables ro;
  ro.region = r;
  ro.parent = parent_index;
  ro.time_offset = parent.time_offset;
  ro.form_of = parent.form_of;
  std::map<int, std::vector<std::size_t>> keep;
  std::map<int, std::vector<char>> kept;
  for (int n : parent.L.degrees()) {
    const auto& cs = parent.cells.at(n);
    kept[n].assign(cs.size(), 0);
    auto d = parent.L.diff(n).transpose();  // row k = boundary of basis vector k
    for (std::size_t k = 0; k < cs.size(); ++k) {
      bool in = true;
      for (auto v : amb.cell_vertices(parent.form_of.at(n), cs[k])) in = in && verts[v];
      if (in && kept.count(n - 1))
        for (const auto& [c, x] : d.row(k)) in = in && kept[n - 1][c];
      if (!in) continue;
      kept[n][k] = 1;
      keep[n].push_back(k);
    }
  }
  std::map<int, std::size_t> dims;
  std::map<int, Matrix> diffs;
  MapChain inc{ChainComplex(), parent.L, 0, {}};
  for (int n : parent.L.degrees()) {
    dims[n] = keep[n].size();
    for (auto k : keep[n]) ro.cells[n].push_back(parent.cells.at(n)[k]);
    if (parent.L.dim(n - 1) > 0) diffs[n] = parent.L.diff(n).submatrix(keep[n - 1], keep[n]);
  }
  ro.L = make_complex(std::move(dims), std::move(diffs));
  inc.source = ro.L;
  for (int n : parent.L.degrees()) {
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (std::size_t i = 0; i < keep[n].size(); ++i) t.emplace_back(keep[n][i], i, Scalar(1));
    inc.set(n, Matrix::from_triplets(parent.L.dim(n), keep[n].size(), std::move(t)));
  }
  ro.tau = pullback(parent.tau, inc);
  return ro;
}

/// Extension by zero between regions, matched through ambient cells.
inline MapChain extension_map(const RegionObservables& a, const RegionObservables& b) {
  MapChain f{a.L, b.L, 0, {}};
  for (int n : a.L.degrees()) {
    std::map<std::size_t, std::size_t> where;
    if (b.cells.count(n))
      for (std::size_t k = 0; k < b.cells.at(n).size(); ++k) where[b.cells.at(n)[k]] = k;
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    const auto& cs = a.cells.at(n);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      auto it = where.find(cs[k]);
      if (it == where.end())
        throw InvariantViolation("observable window of " + a.region.describe() + " leaves " + b.region.describe());
      t.emplace_back(it->second, k, Scalar(1));
    }
    f.set(n, Matrix::from_triplets(b.L.dim(n), cs.size(), std::move(t)));
  }
  return f;
}

}  // namespace detail

/// Per-region observable complexes, unshifted Poisson structures and pushforwards.
inline RegionFunctor observables_functor(TheoryKind kind, const Scalar& mass, const RegionPoset& poset) {
  RegionFunctor f;
  f.poset = poset;
  f.kind = kind;
  f.mass = mass;
  const Lattice& amb = *poset.lattice;
  f.regions.resize(poset.size());
  for (std::size_t i = 0; i < poset.size(); ++i)
    if (poset.regions[i].kind == Region::Kind::TimeSlab)
      f.regions[i] = detail::slab_observables(amb, kind, mass, poset.regions[i]);
  for (std::size_t i = 0; i < poset.size(); ++i) {
    if (poset.regions[i].kind != Region::Kind::Diamond) continue;
    // smallest enclosing slab
    std::optional<std::size_t> parent;
    for (const auto& [a, b] : poset.inclusions)
      if (a == i && poset.regions[b].kind == Region::Kind::TimeSlab &&
          (!parent || poset.includes(b, *parent)))
        parent = b;
    if (!parent) throw InvariantViolation("diamond without an enclosing slab: " + poset.regions[i].describe());
    f.regions[i] = detail::diamond_observables(amb, f.regions[*parent], *parent, poset.regions[i], poset.vertices[i]);
  }
  for (std::size_t i = 0; i < poset.size(); ++i)
    if (f.regions[i].L.dim(0) == 0)
      throw RegionTooSmall("no degree-0 observables in " + poset.regions[i].describe());
  for (const auto& [a, b] : poset.inclusions) f.pushforward[{a, b}] = detail::extension_map(f.regions[a], f.regions[b]);
  return f;
}

/// Failure record of a functor-level check.
struct AxiomCheck {
  std::string axiom;
  std::size_t sub = 0, super = 0;
  std::string status;  // "pass", "fail", "skipped", "informational"
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  std::string note;
};

inline nlohmann::json to_json(const AxiomCheck& c) {
  nlohmann::json j = {{"axiom", c.axiom}, {"region_pair", {c.sub, c.super}}, {"status", c.status}};
  if (c.witness) j["witness"] = {c.witness->first, c.witness->second};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

struct AqftReport {
  std::vector<AxiomCheck> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (c.status == "fail") return false;
    return true;
  }
  std::size_t count(const std::string& status) const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.status == status;
    return n;
  }
};

inline nlohmann::json to_json(const AqftReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : r.checks) j.push_back(to_json(c));
  return j;
}

namespace detail {

inline std::size_t flat_index(const ChainComplex& c, int n, std::size_t i) { return global_index(c, n, i); }

}  // namespace detail

/// Pushforwards are chain maps, compose exactly, and carry each region's tau to the ambient one.
inline AqftReport check_functoriality(const RegionFunctor& f) {
  AqftReport rep;
  for (const auto& [ij, p] : f.pushforward) {
    AxiomCheck chain{"pushforward is a chain map", ij.first, ij.second, "pass", std::nullopt, ""};
    auto b = boundary(p);
    for (const auto& [m, a] : b.components)
      for (std::size_t r = 0; r < a.rows() && !chain.witness; ++r)
        if (!a.row(r).empty()) {
          chain.status = "fail";
          chain.witness = std::make_pair(detail::flat_index(p.source, m, a.row(r).front().first), r);
        }
    rep.checks.push_back(chain);

    AxiomCheck nat{"tau naturality", ij.first, ij.second, "pass", std::nullopt, ""};
    auto diff = detail::pullback(f.regions[ij.second].tau, p) - f.regions[ij.first].tau;
    if (auto w = diff.first_nonzero()) {
      nat.status = "fail";
      nat.witness = std::make_pair(detail::flat_index(p.source, std::get<0>(*w), std::get<1>(*w)),
                                   detail::flat_index(p.source, std::get<2>(*w), std::get<3>(*w)));
    }
    rep.checks.push_back(nat);
  }
  for (const auto& [ij, p] : f.pushforward)
    for (const auto& [jk, q] : f.pushforward) {
      if (ij.second != jk.first) continue;
      AxiomCheck comp{"composition", ij.first, jk.second, "pass", std::nullopt, ""};
      if (!(compose(q, p) == f.push(ij.first, jk.second))) comp.status = "fail";
      rep.checks.push_back(comp);
    }
  return rep;
}

/// Retarded and advanced trivializations of nested slabs agree on the smaller slab's windows.
inline AqftReport check_trivialization_naturality(const RegionFunctor& f) {
  AqftReport rep;
  const Lattice& amb = *f.poset.lattice;
  for (const auto& [a, b] : f.poset.inclusions) {
    const auto &ra = f.regions[a], &rb = f.regions[b];
    if (!ra.obs || !rb.obs) continue;
    for (auto or_ : {Orientation::Retarded, Orientation::Advanced}) {
      AxiomCheck c{std::string("trivialization naturality ") + (or_ == Orientation::Retarded ? "+" : "-"), a, b,
                   "pass", std::nullopt, ""};
      auto la = standard_trivialization(*ra.obs, or_).lambda, lb = standard_trivialization(*rb.obs, or_).lambda;
      auto wa = trivialized_windows(*ra.obs, or_), wb = trivialized_windows(*rb.obs, or_);
      auto amb_cells = [&](const RegionObservables& r, const std::map<int, Window>& ws, int n) {
        std::vector<std::size_t> out;
        const Lattice& sub = r.obs->lattice();
        for (auto cell : ws.at(n).cells(sub)) out.push_back(detail::shift_cell(sub, amb, ws.at(n).form, cell, r.time_offset));
        return out;
      };
      for (int n : la.source.degrees()) {
        if (!wa.count(n + 1)) continue;
        auto src_a = amb_cells(ra, wa, n), dst_a = amb_cells(ra, wa, n + 1);
        auto src_b = amb_cells(rb, wb, n), dst_b = amb_cells(rb, wb, n + 1);
        std::map<std::size_t, std::size_t> in_b, out_b;
        for (std::size_t k = 0; k < src_b.size(); ++k) in_b[src_b[k]] = k;
        for (std::size_t k = 0; k < dst_b.size(); ++k) out_b[dst_b[k]] = k;
        auto ma = la.component(n), mb = lb.component(n);
        auto mbt = mb.transpose();
        for (std::size_t k = 0; k < src_a.size() && !c.witness; ++k) {
          auto it = in_b.find(src_a[k]);
          if (it == in_b.end()) {
            c.status = "fail";
            c.witness = std::make_pair(k, k);
            c.note = "window not nested";
            break;
          }
          // column k of Lambda_a against column it->second of Lambda_b restricted to dst_a
          std::map<std::size_t, Scalar> col_b;
          for (const auto& [r, x] : mbt.row(it->second)) col_b[r] = x;
          for (std::size_t r = 0; r < dst_a.size(); ++r) {
            auto ob = out_b.find(dst_a[r]);
            Scalar vb = (ob != out_b.end() && col_b.count(ob->second)) ? col_b[ob->second] : Scalar(0);
            if (ma.get(r, k) != vb) {
              c.status = "fail";
              c.witness = std::make_pair(k, r);
              break;
            }
          }
        }
      }
      rep.checks.push_back(c);
    }
  }
  return rep;
}

using DisjointnessPredicate = std::function<bool(const RegionPoset&, std::size_t, std::size_t)>;

inline bool poset_disjoint(const RegionPoset& p, std::size_t a, std::size_t b) { return p.disjoint[a][b]; }

/// For every causally disjoint pair of distinct regions and every pair of basis observables,
/// tau_ambient(f1 a, f2 b) = 0; with an algebra, the graded commutator of the pushed-forward
/// generators is compared with zero instead.
inline AqftReport check_einstein_causality(const RegionFunctor& f, const CcrAlgebra* ambient_algebra = nullptr,
                                           const DisjointnessPredicate& disjoint = poset_disjoint) {
  AqftReport rep;
  const auto& amb = f.ambient();
  const std::size_t n = f.poset.size();
  auto to_ambient = [&](std::size_t r) {
    return r == RegionPoset::terminal() ? identity_map(amb.L) : f.push(r, RegionPoset::terminal());
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      AxiomCheck c{"einstein causality", a, b, "pass", std::nullopt, ""};
      if (!disjoint(f.poset, a, b)) {
        c.status = "skipped";
        c.note = "not causally disjoint";
        rep.checks.push_back(c);
        continue;
      }
      auto fa = to_ambient(a), fb = to_ambient(b);
      const auto& la = f.regions[a].L;
      const auto& lb = f.regions[b].L;
      std::size_t pairs = 0;
      for (int m : la.degrees())
        for (int k : lb.degrees()) {
          auto pa = fa.component(m), pb = fb.component(k);
          for (std::size_t i = 0; i < la.dim(m) && !c.witness; ++i)
            for (std::size_t j = 0; j < lb.dim(k) && !c.witness; ++j) {
              ++pairs;
              // pushforwards send basis vectors to basis vectors
              std::size_t gi = pa.transpose().row(i).front().first, gj = pb.transpose().row(j).front().first;
              bool zero;
              if (ambient_algebra) {
                auto x = ambient_algebra->gen(ambient_algebra->index(m, gi));
                auto y = ambient_algebra->gen(ambient_algebra->index(k, gj));
                zero = ambient_algebra->graded_commutator(x, y).is_zero();
              } else {
                const Matrix* blk = amb.tau.find_block(m, k);
                zero = !blk || is_zero(blk->get(gi, gj));
              }
              if (!zero) {
                c.status = "fail";
                c.witness = std::make_pair(detail::flat_index(la, m, i), detail::flat_index(lb, k, j));
              }
            }
        }
      c.note = std::to_string(pairs) + " observable pairs";
      rep.checks.push_back(c);
    }
  return rep;
}

/// Every inclusion whose source contains a Cauchy slice of its target must push forward to a
/// quasi-isomorphism; other inclusions are recorded for information only.
inline AqftReport check_time_slice(const RegionFunctor& f) {
  AqftReport rep;
  bool any = false;
  for (const auto& [ij, p] : f.pushforward) {
    const bool cauchy = f.poset.cauchy[ij.first][ij.second];
    any = any || cauchy;
    auto q = quasi_iso_report(p);
    AxiomCheck c{"time slice", ij.first, ij.second, "pass", std::nullopt, ""};
    std::string ranks;
    for (const auto& [n, k] : q.induced_ranks)
      ranks += "H" + std::to_string(n) + ":" + std::to_string(q.source_ranks[n]) + "->" +
               std::to_string(q.target_ranks[n]) + "(" + std::to_string(k) + ") ";
    c.note = ranks;
    if (!cauchy)
      c.status = "informational";
    else if (!q.quasi_iso) {
      c.status = "fail";
      for (const auto& [n, k] : q.induced_ranks)
        if (k != q.source_ranks[n] || k != q.target_ranks[n]) {
          c.witness = std::make_pair(std::size_t(n - p.source.min_degree()), k);
          break;
        }
    }
    rep.checks.push_back(c);
  }
  if (!any) throw NoCauchyInclusion("poset has no Cauchy inclusion");
  return rep;
}

/// Region algebras CCR(L(R), tau_R) and the induced morphisms along inclusions.
struct QuantizedFunctor {
  const RegionFunctor* classical = nullptr;
  std::vector<std::unique_ptr<CcrAlgebra>> algebras;
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<CcrMorphism>> morphisms;

  const CcrAlgebra& algebra(std::size_t i) const { return *algebras.at(i); }
  const CcrMorphism& morphism(std::size_t i, std::size_t j) const { return *morphisms.at({i, j}); }
};

inline QuantizedFunctor quantize_functor(const RegionFunctor& f, std::size_t cap = 12) {
  QuantizedFunctor q;
  q.classical = &f;
  for (const auto& r : f.regions) q.algebras.push_back(std::make_unique<CcrAlgebra>(r.L, r.tau, cap));
  for (const auto& [ij, p] : f.pushforward)
    q.morphisms[ij] = std::make_unique<CcrMorphism>(*q.algebras[ij.first], *q.algebras[ij.second], p);
  return q;
}

/// Algebra-level time slice on filtration stage k for every Cauchy inclusion.
inline AqftReport check_algebra_time_slice(const QuantizedFunctor& q, std::size_t k) {
  AqftReport rep;
  const auto& poset = q.classical->poset;
  for (const auto& [ij, m] : q.morphisms) {
    if (!poset.cauchy[ij.first][ij.second]) continue;
    AxiomCheck c{"algebra time slice", ij.first, ij.second, "pass", std::nullopt, "stage " + std::to_string(k)};
    auto s1 = filtration_stage(q.algebra(ij.first), k), s2 = filtration_stage(q.algebra(ij.second), k);
    if (!quasi_iso_report(stage_map(*m, s1, s2)).quasi_iso) c.status = "fail";
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace hqft
