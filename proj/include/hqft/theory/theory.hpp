#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hqft/core/complex.hpp"
#include "hqft/green/green.hpp"
#include "hqft/lattice/lattice.hpp"
#include "hqft/theory/window.hpp"
#include "json.hpp"

namespace hqft {

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IncompatiblePair : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Absent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TheoryKind { KG, YM };

inline const char* to_string(TheoryKind k) { return k == TheoryKind::KG ? "KG" : "YM"; }

/// Field complex F1 -Q-> F0 -P-> F0 -Q*-> F1 on a lattice, with the support windows of its
/// observable (L), past/future compact (pc, fc) and solution (Sol) spaces.
///
/// KG: F0 = 0-forms, P = box_0 - m^2, no F1. YM: F0 = 1-forms, F1 = 0-forms, Q = d, P = delta d, Q* = delta.
/// Windows are keyed by homological degree: L and pc in {2, 1, 0, -1}, Sol in {1, 0, -1, -2}.
/// fc windows are the time mirrors of pc windows.
struct FieldTheorySpec {
  TheoryKind kind = TheoryKind::KG;
  std::shared_ptr<const Lattice> lattice;
  Scalar mass;
  int f0 = 0, f1 = -1;
  Matrix Q, P, Qstar;
  std::map<int, Window> obs, pc, sol;

  bool has_ghosts() const { return f1 >= 0; }

  Window fc(int n) const { return pc.at(n).mirrored(*lattice); }
  std::map<int, Window> fc_windows() const {
    std::map<int, Window> out;
    for (const auto& [n, w] : pc) out[n] = fc(n);
    return out;
  }

  /// Lattice operator underlying the L differential out of degree n: -Q, P, -Q*.
  Matrix obs_operator(int n) const {
    if (n == 2) return -Q;
    if (n == 1) return P;
    if (n == 0) return -Qstar;
    throw ShapeMismatch("no observable differential out of degree " + std::to_string(n));
  }

  /// Lattice operator underlying the Sol differential out of degree n: Q, P, Q*.
  Matrix sol_operator(int n) const {
    if (n == 1) return Q;
    if (n == 0) return P;
    if (n == -1) return Qstar;
    throw ShapeMismatch("no solution differential out of degree " + std::to_string(n));
  }

  /// Action S(s) = 1/2 <s, P s> on F0.
  Scalar action(const std::vector<Scalar>& s) const { return lattice->pairing(f0, s, P.apply(s)) / 2; }
};

namespace detail {

inline void require_zero(const Matrix& m, const std::string& what) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (!m.row(r).empty())
      throw InvariantViolation(what + " fails at (" + std::to_string(r) + ", " +
                               std::to_string(m.row(r).front().first) + ")");
}

/// H_p M - M^T H_p, zero exactly when M is formally self-adjoint on p-cochains.
inline Matrix self_adjoint_defect(const Lattice& l, int p, const Matrix& m) {
  auto h = l.metric_matrix(p);
  return h * m - m.transpose() * h;
}

}  // namespace detail

/// Half-unit windows; T = 2(Nt - 1) is the last position. See the README for the derivation.
inline FieldTheorySpec make_theory(TheoryKind kind, std::shared_ptr<const Lattice> l, const Scalar& mass = 0) {
  if (sgn(mass) < 0) throw BadDims("mass must be non-negative");
  FieldTheorySpec s;
  s.kind = kind;
  s.lattice = l;
  const int T = 2 * (l->nt() - 1);
  if (kind == TheoryKind::KG) {
    s.mass = mass;
    s.f0 = 0;
    s.f1 = -1;
    s.P = wave_operator(*l, 0, mass);
    s.Q = Matrix(l->num_vertices(), 0);
    s.Qstar = Matrix(0, l->num_vertices());
    s.obs = {{1, Window::hard(0, 4, T - 4)}, {0, Window::hard(0, 2, T - 2)}};
    s.pc = {{1, Window::past_compact(0, 4, T)}, {0, Window::past_compact(0, 2, T - 2)}};
    s.sol = {{0, Window::soft(0, 0, T)}, {-1, Window::soft(0, 2, T - 2)}};
  } else {
    s.mass = 0;
    s.f0 = 1;
    s.f1 = 0;
    s.Q = l->d(0);
    s.P = l->delta(2) * l->d(1);
    s.Qstar = l->delta(1);
    s.obs = {{2, Window::hard(0, 6, T - 6)},
             {1, Window::hard(1, 5, T - 5)},
             {0, Window::hard(1, 3, T - 3)},
             {-1, Window::hard(0, 2, T - 2)}};
    s.pc = {{2, Window::past_compact(0, 4, T - 2)},
            {1, Window::past_compact(1, 3, T - 2)},
            {0, Window::past_compact(1, 2, T - 3)},
            {-1, Window::past_compact(0, 2, T - 4)}};
    s.sol = {{1, Window::soft(0, 2, T - 2)},
             {0, Window::soft(1, 2, T - 2)},
             {-1, Window::soft(1, 3, T - 3)},
             {-2, Window::soft(0, 4, T - 4)}};
  }
  if (s.has_ghosts()) {
    detail::require_zero(s.P * s.Q, "P Q = 0");
    detail::require_zero(s.Qstar * s.P, "Q* P = 0");
    auto hq = l->metric_matrix(s.f1) * s.Qstar - s.Q.transpose() * l->metric_matrix(s.f0);
    detail::require_zero(hq, "Q* is the metric adjoint of Q");
  }
  detail::require_zero(detail::self_adjoint_defect(*l, s.f0, s.P), "P is formally self-adjoint");
  return s;
}

inline nlohmann::json to_json(const Window& w) {
  return {{"form", w.form}, {"lo", w.lo}, {"hi", w.hi}, {"hard_lo", w.hard_lo}, {"hard_hi", w.hard_hi}};
}

inline nlohmann::json to_json(const FieldTheorySpec& s) {
  nlohmann::json margins;
  for (const auto& [name, ws] : {std::pair{"L", &s.obs}, std::pair{"pc", &s.pc}, std::pair{"sol", &s.sol}})
    for (const auto& [n, w] : *ws) margins[name][std::to_string(n)] = to_json(w);
  return {{"kind", to_string(s.kind)},
          {"nt", s.lattice->nt()},
          {"nx", s.lattice->nx()},
          {"mass", s.mass.get_str()},
          {"margins", margins}};
}

namespace detail {

/// Complex on windowed cells; d_n is the lattice operator restricted to windows n -> n-1.
template <class Op>
ChainComplex windowed_complex(const Lattice& l, const std::map<int, Window>& ws, Op op) {
  std::map<int, std::size_t> dims;
  std::map<int, Matrix> diffs;
  for (const auto& [n, w] : ws) dims[n] = w.cells(l).size();
  for (const auto& [n, w] : ws) {
    auto lower = ws.find(n - 1);
    if (lower == ws.end()) continue;
    Matrix full = op(n);
    if (auto wit = restriction_witness(l, full, w, lower->second))
      throw InvariantViolation("differential out of degree " + std::to_string(n) + " leaves its window at (" +
                               std::to_string(wit->first) + ", " + std::to_string(wit->second) + ")");
    diffs[n] = restrict_operator(l, full, w, lower->second);
  }
  return make_complex(std::move(dims), std::move(diffs));
}

/// Degree-0 family of signed window inclusions source_n -> target_{n + shift}.
inline MapChain window_map(const Lattice& l, const ChainComplex& src, const ChainComplex& dst,
                           const std::map<int, Window>& ws, const std::map<int, Window>& wt, int shift,
                           const std::map<int, int>& signs = {}) {
  MapChain f{src, dst, 0, {}};
  for (const auto& [n, w] : ws) {
    auto it = wt.find(n + shift);
    if (it == wt.end()) continue;
    if (auto wit = restriction_witness(l, Matrix::identity(l.num_cells(w.form)), w, it->second))
      throw InvariantViolation("inclusion in degree " + std::to_string(n) + " is not well defined at cell " +
                               std::to_string(wit->first));
    Scalar s = 1;
    if (auto si = signs.find(n); si != signs.end()) s = si->second;
    f.set(n, window_inclusion(l, w, it->second).scaled(s));
  }
  return f;
}

}  // namespace detail

/// Degrees 1, 0, -1, -2 with F1, F0, F0, F1 and differentials Q, P, Q*.
inline ChainComplex solution_complex(const FieldTheorySpec& s) {
  return detail::windowed_complex(*s.lattice, s.sol, [&](int n) { return s.sol_operator(n); });
}

/// Bilinear form on a complex, nonzero only on degree pairs (m, n) with m + n = degree.
/// Block (m, n) has rows indexed by the basis of V_m and columns by V_n: value a^T B b.
struct BilinearForm {
  ChainComplex space;
  int degree = 0;
  std::map<std::pair<int, int>, Matrix> blocks;

  Matrix block(int m, int n) const {
    auto it = blocks.find({m, n});
    if (it != blocks.end()) return it->second;
    return Matrix(space.dim(m), space.dim(n));
  }

  /// Stored block or nullptr when it is zero; no copy.
  const Matrix* find_block(int m, int n) const {
    auto it = blocks.find({m, n});
    return it == blocks.end() ? nullptr : &it->second;
  }

  void set(int m, int n, Matrix b) {
    if (m + n != degree) throw ShapeMismatch("bilinear block outside its degree");
    if (b.rows() != space.dim(m) || b.cols() != space.dim(n)) throw ShapeMismatch("bilinear block shape");
    if (b.is_zero_matrix())
      blocks.erase({m, n});
    else
      blocks[{m, n}] = std::move(b);
  }

  Scalar operator()(int m, const std::vector<Scalar>& a, int n, const std::vector<Scalar>& b) const {
    if (m + n != degree) return 0;
    auto bb = block(m, n).apply(b);
    Scalar s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!hqft::is_zero(a[i]) && !hqft::is_zero(bb[i])) s += a[i] * bb[i];
    return s;
  }

  /// (beta . d_{V (x) V}) on pairs of total degree + 1: beta(da, b) + (-1)^m beta(a, db).
  BilinearForm after_differential() const {
    BilinearForm out{space, degree + 1, {}};
    for (int m : space.degrees()) {
      int n = degree + 1 - m;
      if (space.dim(n) == 0) continue;
      Matrix acc(space.dim(m), space.dim(n));
      if (space.dim(m - 1) > 0) acc = acc + space.diff(m).transpose() * block(m - 1, n);
      if (space.dim(n - 1) > 0) {
        Matrix t = block(m, n - 1) * space.diff(n);
        acc = (m % 2 == 0) ? acc + t : acc - t;
      }
      out.set(m, n, std::move(acc));
    }
    return out;
  }

  /// Graded swap: (beta gamma)(a, b) = (-1)^{|a||b|} beta(b, a).
  BilinearForm braided() const {
    BilinearForm out{space, degree, {}};
    for (const auto& [mn, b] : blocks) {
      auto [m, n] = mn;
      Scalar s = (m * n) % 2 == 0 ? 1 : -1;
      out.set(n, m, b.transpose().scaled(s));
    }
    return out;
  }

  BilinearForm combine(const BilinearForm& o, const Scalar& s) const {
    if (o.degree != degree) throw ShapeMismatch("bilinear forms of different degree");
    BilinearForm out{space, degree, {}};
    for (int m : space.degrees()) {
      int n = degree - m;
      if (space.dim(n) == 0) continue;
      out.set(m, n, block(m, n) + o.block(m, n).scaled(s));
    }
    return out;
  }
  BilinearForm operator+(const BilinearForm& o) const { return combine(o, 1); }
  BilinearForm operator-(const BilinearForm& o) const { return combine(o, -1); }
  BilinearForm scaled(const Scalar& s) const { return BilinearForm{space, degree, {}}.combine(*this, s); }

  bool is_zero() const {
    for (const auto& [mn, b] : blocks)
      if (!b.is_zero_matrix()) return false;
    return true;
  }
  bool operator==(const BilinearForm& o) const { return degree == o.degree && (*this - o).is_zero(); }

  /// First (m, row, n, col) with a nonzero entry.
  std::optional<std::tuple<int, std::size_t, int, std::size_t>> first_nonzero() const {
    for (const auto& [mn, b] : blocks)
      for (std::size_t r = 0; r < b.rows(); ++r)
        if (!b.row(r).empty()) return std::make_tuple(mn.first, r, mn.second, b.row(r).front().first);
    return std::nullopt;
  }
};

/// The ground field placed in degree k.
inline ChainComplex ground(int k = 0) { return ChainComplex({{k, 1}}, {}); }

/// beta as a map V (x) V -> ground(target_degree) of degree degree - target_degree.
inline MapChain form_to_map(const BilinearForm& beta, int target_degree = 0) {
  auto vv = tensor(beta.space, beta.space);
  auto tgt = ground(target_degree);
  MapChain f{vv, tgt, target_degree - beta.degree, {}};
  const int n = beta.degree;
  if (vv.dim(n) == 0) return f;
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trips;
  for (auto [m, off] : detail::tensor_offsets(beta.space, beta.space, n)) {
    const std::size_t nw = beta.space.dim(n - m);
    auto b = beta.block(m, n - m);
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (const auto& [j, v] : b.row(i)) trips.emplace_back(0, off + i * nw + j, v);
  }
  f.set(n, Matrix::from_triplets(1, vv.dim(n), std::move(trips)));
  return f;
}

inline BilinearForm map_to_form(const ChainComplex& v, const MapChain& f, int target_degree = 0) {
  const int n = target_degree - f.degree;
  BilinearForm beta{v, n, {}};
  auto row = f.component(n);
  if (row.rows() == 0) return beta;
  for (auto [m, off] : detail::tensor_offsets(v, v, n)) {
    const std::size_t nv = v.dim(m), nw = v.dim(n - m);
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trips;
    for (const auto& [c, val] : row.row(0))
      if (c >= off && c < off + nv * nw) trips.emplace_back((c - off) / nw, (c - off) % nw, val);
    beta.set(m, n - m, Matrix::from_triplets(nv, nw, std::move(trips)));
  }
  return beta;
}

/// L, L_pc, L_fc, Sol and Sol[1] with the maps j, j_pc, j_fc, iota_pc, iota_fc and the
/// evaluation pairings <L_n, Sol_{-n}>.
struct ObservablesComplex {
  FieldTheorySpec spec;
  ChainComplex L, pc, fc, sol, sol1;
  MapChain j, j_pc, j_fc, iota_pc, iota_fc;

  const Lattice& lattice() const { return *spec.lattice; }
  std::vector<std::size_t> cells(int n) const { return spec.obs.at(n).cells(lattice()); }

  /// Matrix of <a, s> for a in L_n, s in Sol_{-n}: the metric on shared cells.
  Matrix pairing(int n) const {
    const auto& wl = spec.obs.at(n);
    const auto& ws = spec.sol.at(-n);
    const auto& h = lattice().metric(wl.form);
    auto lc = wl.cells(lattice());
    auto sc = ws.cells(lattice());
    std::map<std::size_t, std::size_t> pos;
    for (std::size_t k = 0; k < sc.size(); ++k) pos[sc[k]] = k;
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (std::size_t i = 0; i < lc.size(); ++i) {
      auto it = pos.find(lc[i]);
      if (it == pos.end()) throw InvariantViolation("observable cell outside the solution window");
      t.emplace_back(i, it->second, h[lc[i]]);
    }
    return Matrix::from_triplets(lc.size(), sc.size(), std::move(t));
  }

  /// Lattice cochain of an observable in degree n.
  std::vector<Scalar> to_lattice(int n, const std::vector<Scalar>& a) const {
    auto c = cells(n);
    std::vector<Scalar> out(lattice().num_cells(spec.obs.at(n).form));
    for (std::size_t i = 0; i < c.size(); ++i) out[c[i]] = a[i];
    return out;
  }
};

inline ObservablesComplex observables_complex(const FieldTheorySpec& s) {
  const Lattice& l = *s.lattice;
  ObservablesComplex o;
  o.spec = s;
  auto op = [&](int n) { return s.obs_operator(n); };
  o.L = detail::windowed_complex(l, s.obs, op);
  o.pc = detail::windowed_complex(l, s.pc, op);
  auto fcw = s.fc_windows();
  o.fc = detail::windowed_complex(l, fcw, op);
  o.sol = solution_complex(s);
  o.sol1 = shift(o.sol, 1);
  // Sol[1]_n = Sol_{n-1}; j carries +iota in degrees <= 0 and -iota in degrees >= 1
  std::map<int, Window> sol1w;
  for (const auto& [n, w] : s.sol) sol1w[n + 1] = w;
  const std::map<int, int> jsign = {{-1, 1}, {0, 1}, {1, -1}, {2, -1}};
  o.j = detail::window_map(l, o.L, o.sol1, s.obs, sol1w, 0, jsign);
  o.j_pc = detail::window_map(l, o.pc, o.sol1, s.pc, sol1w, 0, jsign);
  o.j_fc = detail::window_map(l, o.fc, o.sol1, fcw, sol1w, 0, jsign);
  o.iota_pc = detail::window_map(l, o.L, o.pc, s.obs, s.pc, 0);
  o.iota_fc = detail::window_map(l, o.L, o.fc, s.obs, fcw, 0);
  for (const MapChain* f : {&o.j, &o.j_pc, &o.j_fc, &o.iota_pc, &o.iota_fc})
    if (auto w = chain_map_witness(*f))
      throw InvariantViolation("structure map is not a chain map in degree " + std::to_string(std::get<0>(*w)));
  return o;
}

/// Upsilon(a, b) = (-1)^{|a|} <a, j b>, nonzero on degree pairs summing to 1.
inline BilinearForm shifted_poisson(const ObservablesComplex& o) {
  BilinearForm u{o.L, 1, {}};
  for (int m : o.L.degrees()) {
    int n = 1 - m;
    if (o.L.dim(n) == 0) continue;
    Matrix b = o.pairing(m) * o.j.component(n);
    u.set(m, n, (m % 2 == 0) ? b : -b);
  }
  return u;
}

/// A degree-1 map chain on L_pc (retarded) or L_fc (advanced).
struct Trivialization {
  Orientation orientation = Orientation::Retarded;
  MapChain lambda;
};

/// Lattice operators of the standard trivialization, keyed by source degree.
/// KG: G. YM: -G d, G, -delta G.
inline std::map<int, Matrix> standard_operators(const FieldTheorySpec& s, Orientation o) {
  GreenOperator g(s.lattice, s.f0, s.mass, o);
  if (s.kind == TheoryKind::KG) return {{0, g.matrix()}};
  const Lattice& l = *s.lattice;
  return {{-1, -(g.matrix() * l.d(0))}, {0, g.matrix()}, {1, -(l.delta(1) * g.matrix())}};
}

inline const ChainComplex& trivialized_complex(const ObservablesComplex& o, Orientation or_) {
  return or_ == Orientation::Retarded ? o.pc : o.fc;
}

inline std::map<int, Window> trivialized_windows(const ObservablesComplex& o, Orientation or_) {
  return or_ == Orientation::Retarded ? o.spec.pc : o.spec.fc_windows();
}

/// Restricts lattice operators (source degree m -> m + 1) to the pc or fc windows.
inline Trivialization trivialization_from(const ObservablesComplex& o, Orientation or_,
                                          const std::map<int, Matrix>& ops) {
  const auto& c = trivialized_complex(o, or_);
  auto ws = trivialized_windows(o, or_);
  Trivialization t{or_, MapChain{c, c, 1, {}}};
  for (const auto& [m, full] : ops) {
    if (!ws.count(m) || !ws.count(m + 1)) continue;
    t.lambda.set(m, restrict_operator(o.lattice(), full, ws.at(m), ws.at(m + 1)));
  }
  return t;
}

inline Trivialization standard_trivialization(const ObservablesComplex& o, Orientation or_) {
  auto t = trivialization_from(o, or_, standard_operators(o.spec, or_));
  if (!(boundary(t.lambda) == identity_map(t.lambda.source)))
    throw InvariantViolation(std::string("standard ") + to_string(or_) + " trivialization is not contracting");
  return t;
}

/// Lambda~ = Lambda + d(lambda); the contracting property is rechecked.
inline Trivialization perturb_trivialization(const Trivialization& t, const MapChain& lambda) {
  if (lambda.degree != 2 || !(lambda.source == t.lambda.source) || !(lambda.target == t.lambda.target))
    throw ShapeMismatch("perturbation must be a degree-2 chain on the trivialized complex");
  Trivialization out{t.orientation, t.lambda + boundary(lambda)};
  if (!(boundary(out.lambda) == identity_map(out.lambda.source)))
    throw InvariantViolation("perturbed trivialization is not contracting");
  return out;
}

/// Lambda = j_pc Lambda+ iota - j_fc Lambda- iota, a degree-1 map L -> Sol[1].
inline MapChain causal_propagator_chain(const ObservablesComplex& o, const Trivialization& plus,
                                        const Trivialization& minus) {
  auto a = compose(o.j_pc, compose(plus.lambda, o.iota_pc));
  auto b = compose(o.j_fc, compose(minus.lambda, o.iota_fc));
  return a - b;
}

/// tau(a, b) = <a, Lambda b>, nonzero on degree pairs summing to 0.
inline BilinearForm pairing_form(const ObservablesComplex& o, const MapChain& lam, int degree) {
  BilinearForm f{o.L, degree, {}};
  for (int m : o.L.degrees()) {
    int n = degree - m;
    if (o.L.dim(n) == 0) continue;
    f.set(m, n, o.pairing(m) * lam.component(n));
  }
  return f;
}

namespace detail {

inline AxiomResult compare_chains(const std::string& name, const MapChain& lhs, const MapChain& rhs) {
  AxiomResult r{name, lhs.source.total_dim(), {}};
  std::size_t off = 0;
  for (int m : lhs.source.degrees()) {
    auto diff = (lhs.component(m) - rhs.component(m)).transpose();
    for (std::size_t c = 0; c < diff.rows(); ++c)
      if (!diff.row(c).empty()) r.failures.push_back({off + c, diff.row(c).front().first});
    off += lhs.source.dim(m);
  }
  return r;
}

inline AxiomResult form_zero(const std::string& name, const BilinearForm& f) {
  AxiomResult r{name, f.space.total_dim(), {}};
  std::map<int, std::size_t> off;
  std::size_t o = 0;
  for (int m : f.space.degrees()) {
    off[m] = o;
    o += f.space.dim(m);
  }
  for (const auto& [mn, b] : f.blocks)
    for (std::size_t i = 0; i < b.rows(); ++i)
      if (!b.row(i).empty()) r.failures.push_back({off[mn.first] + i, off[mn.second] + b.row(i).front().first});
  return r;
}

}  // namespace detail

/// Contracting homotopies, trivializing chains for j and Upsilon, closedness of Lambda and
/// graded skew-adjointness of the induced pairing. Failures carry (basis index, witness entry).
struct TrivializationReport {
  std::vector<AxiomResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed()) return false;
    return true;
  }
  const AxiomResult& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.axiom == name) return c;
    throw std::out_of_range("no check " + name);
  }
};

inline nlohmann::json to_json(const TrivializationReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : r.checks) j.push_back(to_json(c));
  return j;
}

inline TrivializationReport verify_trivialization(const ObservablesComplex& o, const Trivialization& plus,
                                                  const Trivialization& minus) {
  TrivializationReport rep;
  rep.checks.push_back(detail::compare_chains("dLambda+=id", boundary(plus.lambda), identity_map(o.pc)));
  rep.checks.push_back(detail::compare_chains("dLambda-=id", boundary(minus.lambda), identity_map(o.fc)));

  auto lam = causal_propagator_chain(o, plus, minus);
  rep.checks.push_back(detail::compare_chains("dLambda=0", boundary(lam), zero_map(o.L, o.sol1, 0)));

  auto ups = shifted_poisson(o);
  for (const auto& [tag, t, jx, ix] : {std::tuple{"+", &plus, &o.j_pc, &o.iota_pc},
                                       std::tuple{"-", &minus, &o.j_fc, &o.iota_fc}}) {
    auto k = compose(*jx, compose(t->lambda, *ix));
    rep.checks.push_back(detail::compare_chains(std::string("j=dK") + tag, boundary(k), o.j));
    // K_Upsilon(a, b) = <a, K b>: the Koszul sign of (id (x) K) cancels the braiding sign
    auto ku = pairing_form(o, k, 0);
    rep.checks.push_back(detail::form_zero(std::string("Upsilon=dK") + tag, ku.after_differential() - ups));
  }

  auto tau = pairing_form(o, lam, 0);
  rep.checks.push_back(detail::form_zero("skew", tau + tau.braided()));
  return rep;
}

/// Unshifted Poisson structure tau = <-, Lambda -> with its propagator chain.
struct UnshiftedPoisson {
  BilinearForm tau;
  MapChain lambda;
  bool verified = true;  // false when built with the compatibility bypass
};

inline UnshiftedPoisson unshifted_poisson(const ObservablesComplex& o, const Trivialization& plus,
                                          const Trivialization& minus, bool bypass_compatibility = false) {
  auto lam = causal_propagator_chain(o, plus, minus);
  auto tau = pairing_form(o, lam, 0);
  if (!bypass_compatibility) {
    if (auto w = (tau + tau.braided()).first_nonzero())
      throw IncompatiblePair("tau is not graded antisymmetric at degrees (" + std::to_string(std::get<0>(*w)) + ", " +
                             std::to_string(std::get<2>(*w)) + ")");
  }
  return {tau, lam, !bypass_compatibility};
}

inline UnshiftedPoisson standard_poisson(const ObservablesComplex& o) {
  return unshifted_poisson(o, standard_trivialization(o, Orientation::Retarded),
                           standard_trivialization(o, Orientation::Advanced));
}

/// Graded antisymmetric rho of degree -1 with rho . d = tau~ - tau, found by linear solve on
/// hom(L (x) L, ground) and antisymmetrized as (rho - rho gamma) / 2.
inline BilinearForm homotopy_between_taus(const BilinearForm& tau, const BilinearForm& tau_tilde,
                                          std::size_t cap = 20000) {
  const ChainComplex& v = tau.space;
  auto h = find_homotopy(form_to_map(tau_tilde), form_to_map(tau), cap);
  if (!h) throw Absent("tau~ - tau is not a boundary");
  auto g = braiding(v, v);
  auto ha = (*h - compose(*h, g)).scaled(Scalar(1, 2));
  auto rho = map_to_form(v, ha);
  if (!(rho.after_differential() == tau_tilde - tau)) throw InvariantViolation("antisymmetrized homotopy fails");
  return rho;
}

/// Degree-2 chains lambda+- built from a lattice operator R : F1 -> F0 (YM only):
/// lambda+_{-1} = R on pc windows, lambda-_0 = -R^dagger on fc windows (metric adjoint).
/// The pair keeps the induced tau graded antisymmetric.
inline std::pair<MapChain, MapChain> compatible_perturbation(const ObservablesComplex& o, const Matrix& r) {
  const auto& s = o.spec;
  if (!s.has_ghosts()) throw ShapeMismatch("perturbations need a degree-2 chain space");
  const Lattice& l = o.lattice();
  auto hinv = l.metric(s.f1);
  for (auto& x : hinv) x = 1 / x;
  Matrix rdag = Lattice::diag(hinv) * r.transpose() * l.metric_matrix(s.f0);
  auto pcw = s.pc;
  auto fcw = s.fc_windows();
  MapChain lp{o.pc, o.pc, 2, {}}, lm{o.fc, o.fc, 2, {}};
  lp.set(-1, restrict_operator(l, r, pcw.at(-1), pcw.at(1)));
  lm.set(0, restrict_operator(l, -rdag, fcw.at(0), fcw.at(2)));
  return {lp, lm};
}

}  // namespace hqft
