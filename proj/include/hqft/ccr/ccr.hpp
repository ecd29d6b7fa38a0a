#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqft/core/complex.hpp"
#include "hqft/theory/theory.hpp"

namespace hqft {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotAntisymmetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotAChainMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Generator indices of a product, left to right.
using Word = std::vector<std::uint32_t>;

/// Finite Gaussian-rational combination of words; no stored zero coefficients.
struct Element {
  std::map<Word, Gaussian> terms;

  static Element unit(const Gaussian& c = Gaussian(1)) { return term({}, c); }
  static Element term(Word w, const Gaussian& c) {
    Element e;
    e.add(std::move(w), c);
    return e;
  }

  void add(const Word& w, const Gaussian& c) {
    if (hqft::is_zero(c)) return;
    auto [it, fresh] = terms.try_emplace(w, c);
    if (fresh) return;
    it->second += c;
    if (hqft::is_zero(it->second)) terms.erase(it);
  }
  void add(const Element& o, const Gaussian& c = Gaussian(1)) {
    for (const auto& [w, v] : o.terms) add(w, v * c);
  }

  bool is_zero() const { return terms.empty(); }
  std::size_t max_length() const {
    std::size_t n = 0;
    for (const auto& [w, c] : terms) n = std::max(n, w.size());
    return n;
  }
  Gaussian coefficient(const Word& w) const {
    auto it = terms.find(w);
    return it == terms.end() ? Gaussian() : it->second;
  }

  Element operator+(const Element& o) const {
    Element e = *this;
    e.add(o);
    return e;
  }
  Element operator-(const Element& o) const {
    Element e = *this;
    e.add(o, Gaussian(-1));
    return e;
  }
  Element scaled(const Gaussian& c) const {
    Element e;
    e.add(*this, c);
    return e;
  }
  bool operator==(const Element& o) const { return terms == o.terms; }
  bool operator!=(const Element& o) const { return !(*this == o); }
};

/// Text form `coeff * [g_i1 g_i2 ...]` joined by " + " in word order; "0" when empty.
inline std::string to_string(const Element& e) {
  if (e.is_zero()) return "0";
  std::string out;
  for (const auto& [w, c] : e.terms) {
    if (!out.empty()) out += " + ";
    out += to_string(c) + " * [";
    for (std::size_t k = 0; k < w.size(); ++k) out += (k ? " g" : "g") + std::to_string(w[k]);
    out += "]";
  }
  return out;
}

inline nlohmann::json to_json(const Element& e) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [w, c] : e.terms) terms.push_back({{"word", w}, {"re", c.re.get_str()}, {"im", c.im.get_str()}});
  return terms;
}

enum class ReductionStrategy { Leftmost, Rightmost };
enum class InvolutionRule { Koszul, Plain };

/// CCR dg *-algebra of a complex V with a degree-0 graded antisymmetric chain-map pairing tau.
///
/// Generators are the basis of V ordered by homological degree, then basis index. Elements are
/// kept as combinations of normal words: weakly increasing, odd generators at most once.
class CcrAlgebra {
 public:
  CcrAlgebra(ChainComplex v, BilinearForm tau, std::size_t cap = 12)
      : v_(std::move(v)), tau_form_(std::move(tau)), cap_(cap), cache_(std::make_shared<Cache>()) {
    if (tau_form_.degree != 0) throw ShapeMismatch("CCR pairing must have degree 0");
    if (!(tau_form_ + tau_form_.braided()).is_zero()) throw NotAntisymmetric("tau is not graded antisymmetric");
    if (!tau_form_.after_differential().is_zero()) throw NotAChainMap("tau is not a chain map");
    for (int n : v_.degrees()) {
      offset_[n] = degree_.size();
      for (std::size_t i = 0; i < v_.dim(n); ++i) {
        degree_.push_back(n);
        local_.push_back(i);
      }
    }
    const std::size_t g = degree_.size();
    tau_.assign(g * g, Scalar(0));
    for (const auto& [mn, b] : tau_form_.blocks)
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (const auto& [c, x] : b.row(r)) tau_[index(mn.first, r) * g + index(mn.second, c)] = x;
    dgen_.resize(g);
    for (int n : v_.degrees()) {
      if (v_.dim(n - 1) == 0) continue;
      auto d = v_.diff(n);
      for (std::size_t r = 0; r < d.rows(); ++r)
        for (const auto& [c, x] : d.row(r)) dgen_[index(n, c)].emplace_back(index(n - 1, r), x);
    }
  }

  const ChainComplex& generators() const { return v_; }
  const BilinearForm& pairing() const { return tau_form_; }
  std::size_t cap() const { return cap_; }
  std::size_t num_generators() const { return degree_.size(); }
  int degree(std::uint32_t g) const { return degree_.at(g); }
  std::uint32_t index(int n, std::size_t i) const { return std::uint32_t(offset_.at(n) + i); }
  std::pair<int, std::size_t> basis_of(std::uint32_t g) const { return {degree_.at(g), local_.at(g)}; }
  const Scalar& tau(std::uint32_t a, std::uint32_t b) const { return tau_[a * degree_.size() + b]; }

  int degree(const Word& w) const {
    int s = 0;
    for (auto g : w) s += degree_[g];
    return s;
  }
  /// Degree of a homogeneous element; nullopt for zero or mixed degrees.
  std::optional<int> degree(const Element& e) const {
    std::optional<int> d;
    for (const auto& [w, c] : e.terms) {
      int k = degree(w);
      if (d && *d != k) return std::nullopt;
      d = k;
    }
    return d;
  }

  bool is_normal(const Word& w) const { return !descent(w, ReductionStrategy::Leftmost); }

  Element unit() const { return Element::unit(); }
  Element gen(std::uint32_t g) const { return Element::term({g}, Gaussian(1)); }
  /// Linear combination sum_i a_i g(n, i).
  Element from_vector(int n, const std::vector<Scalar>& a) const {
    Element e;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!hqft::is_zero(a[i])) e.add(Word{index(n, i)}, Gaussian(a[i]));
    return e;
  }

  /// Normal form of an arbitrary word by repeated rewriting of one out-of-order adjacent pair.
  Element normal_form(const Word& w, ReductionStrategy s = ReductionStrategy::Leftmost) const {
    if (w.size() > cap_) throw CapExceeded("word length " + std::to_string(w.size()) + " above cap");
    return reduce(w, s);
  }

  Element normalize(const Element& e, ReductionStrategy s = ReductionStrategy::Leftmost) const {
    Element out;
    for (const auto& [w, c] : e.terms) out.add(normal_form(w, s), c);
    return out;
  }

  Element multiply(const Element& a, const Element& b) const {
    if (a.max_length() + b.max_length() > cap_) throw CapExceeded("product longer than the word cap");
    Element out;
    for (const auto& [u, x] : a.terms)
      for (const auto& [w, y] : b.terms) {
        Word uw = u;
        uw.insert(uw.end(), w.begin(), w.end());
        out.add(reduce(uw, ReductionStrategy::Leftmost), x * y);
      }
    return out;
  }

  /// Graded Leibniz extension of the generator differential, without reordering.
  Element free_differential(const Element& e) const {
    Element out;
    for (const auto& [w, c] : e.terms) {
      int sign = 1;
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (const auto& [h, x] : dgen_[w[k]]) {
          Word u = w;
          u[k] = h;
          out.add(u, c * Gaussian(x * sign));
        }
        if (degree_[w[k]] % 2 != 0) sign = -sign;
      }
    }
    return out;
  }

  /// Antilinear reversal with generators self-adjoint; Koszul adds (-1)^{|a||b|} per swapped pair.
  Element free_involution(const Element& e, InvolutionRule rule = InvolutionRule::Koszul) const {
    Element out;
    for (const auto& [w, c] : e.terms) {
      int sign = 1;
      if (rule == InvolutionRule::Koszul)
        for (std::size_t a = 0; a < w.size(); ++a)
          for (std::size_t b = a + 1; b < w.size(); ++b)
            if (degree_[w[a]] % 2 != 0 && degree_[w[b]] % 2 != 0) sign = -sign;
      out.add(Word(w.rbegin(), w.rend()), c.conj() * Gaussian(sign));
    }
    return out;
  }

  Element differential(const Element& e) const { return normalize(free_differential(e)); }
  Element involution(const Element& e, InvolutionRule rule = InvolutionRule::Koszul) const {
    return normalize(free_involution(e, rule));
  }

  /// mu(a, b) - (-1)^{|a||b|} mu(b, a), extended bilinearly over homogeneous words.
  Element graded_commutator(const Element& a, const Element& b) const {
    Element out;
    for (const auto& [u, x] : a.terms)
      for (const auto& [w, y] : b.terms) {
        Element eu = Element::term(u, x), ew = Element::term(w, y);
        out.add(multiply(eu, ew));
        out.add(multiply(ew, eu), Gaussian(-koszul(long(degree(u)) * degree(w))));
      }
    return out;
  }

  /// Free element g h - (-1)^{|g||h|} h g - i tau(g, h) 1 generating the CCR ideal.
  Element relation(std::uint32_t g, std::uint32_t h) const {
    Element r;
    r.add(Word{g, h}, Gaussian(1));
    r.add(Word{h, g}, Gaussian(-koszul(long(degree_[g]) * degree_[h])));
    r.add(Word{}, Gaussian(Scalar(0), -tau(g, h)));
    return r;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<Word, Element> memo[2];
  };

  bool odd(std::uint32_t g) const { return degree_[g] % 2 != 0; }

  bool out_of_order(const Word& w, std::size_t k) const {
    return w[k] > w[k + 1] || (w[k] == w[k + 1] && odd(w[k]));
  }

  std::optional<std::size_t> descent(const Word& w, ReductionStrategy s) const {
    if (w.size() < 2) return std::nullopt;
    if (s == ReductionStrategy::Leftmost) {
      for (std::size_t k = 0; k + 1 < w.size(); ++k)
        if (out_of_order(w, k)) return k;
    } else {
      for (std::size_t k = w.size() - 1; k-- > 0;)
        if (out_of_order(w, k)) return k;
    }
    return std::nullopt;
  }

  // w[k] w[k+1] = (-1)^{|a||b|} w[k+1] w[k] + i tau(w[k], w[k+1]); for a repeated odd v, v v = (i/2) tau(v, v).
  Element reduce(const Word& w, ReductionStrategy s) const {
    auto k = descent(w, s);
    if (!k) return Element::term(w, Gaussian(1));
    auto& memo = cache_->memo[s == ReductionStrategy::Leftmost ? 0 : 1];
    {
      std::lock_guard<std::mutex> lock(cache_->mu);
      auto it = memo.find(w);
      if (it != memo.end()) return it->second;
    }
    const std::uint32_t a = w[*k], b = w[*k + 1];
    Word shorter;
    shorter.reserve(w.size() - 2);
    shorter.insert(shorter.end(), w.begin(), w.begin() + long(*k));
    shorter.insert(shorter.end(), w.begin() + long(*k) + 2, w.end());
    Element out;
    const Scalar& t = tau(a, b);
    if (a == b) {
      if (!hqft::is_zero(t)) out.add(reduce(shorter, s), Gaussian(Scalar(0), t / 2));
    } else {
      Word swapped = w;
      std::swap(swapped[*k], swapped[*k + 1]);
      out.add(reduce(swapped, s), Gaussian(koszul(long(degree_[a]) * degree_[b])));
      if (!hqft::is_zero(t)) out.add(reduce(shorter, s), Gaussian(Scalar(0), t));
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    memo.emplace(w, out);
    return out;
  }

  ChainComplex v_;
  BilinearForm tau_form_;
  std::size_t cap_;
  std::map<int, std::size_t> offset_;
  std::vector<int> degree_;
  std::vector<std::size_t> local_;
  std::vector<Scalar> tau_;
  std::vector<std::vector<std::pair<std::uint32_t, Scalar>>> dgen_;
  std::shared_ptr<Cache> cache_;
};

inline CcrAlgebra ccr_algebra(const BilinearForm& tau, std::size_t cap = 12) { return CcrAlgebra(tau.space, tau, cap); }

/// Algebra morphism CCR(V, tau_V) -> CCR(W, tau_W) induced by a Poisson-preserving chain map.
class CcrMorphism {
 public:
  CcrMorphism(const CcrAlgebra& src, const CcrAlgebra& dst, MapChain f)
      : src_(&src), dst_(&dst), f_(std::move(f)) {
    if (!is_chain_map(f_)) throw NotAChainMap("generator map is not a chain map");
    const auto& v = src.generators();
    for (int m : v.degrees()) {
      auto fm = f_.component(m);
      for (std::size_t i = 0; i < v.dim(m); ++i) {
        std::vector<Scalar> col(fm.rows());
        for (std::size_t r = 0; r < fm.rows(); ++r) col[r] = fm.get(r, i);
        images_.push_back(dst.from_vector(m, col));
      }
    }
    for (std::uint32_t a = 0; a < src.num_generators(); ++a)
      for (std::uint32_t b = 0; b < src.num_generators(); ++b) {
        auto c = dst.graded_commutator(images_[a], images_[b]);
        if (c != Element::unit(Gaussian(Scalar(0), src.tau(a, b))))
          throw InvariantViolation("generator map does not preserve tau at (" + std::to_string(a) + ", " +
                                   std::to_string(b) + ")");
      }
  }

  const MapChain& generator_map() const { return f_; }

  Element operator()(const Element& e) const {
    Element out;
    for (const auto& [w, c] : e.terms) {
      Element acc = dst_->unit();
      for (auto g : w) acc = dst_->multiply(acc, images_.at(g));
      out.add(acc, c);
    }
    return out;
  }

 private:
  const CcrAlgebra* src_;
  const CcrAlgebra* dst_;
  MapChain f_;
  std::vector<Element> images_;
};

/// Span of normal words of length <= k as a complex of Gaussian vector spaces.
struct FiltrationStage {
  std::size_t length = 0;
  GChainComplex complex;
  std::map<int, std::vector<Word>> basis;
  std::map<int, std::map<Word, std::size_t>> position;

  /// Coordinates of an element of degree n; throws if it leaves the stage.
  std::vector<Gaussian> coordinates(int n, const Element& e) const {
    std::vector<Gaussian> x(complex.dim(n));
    const auto& pos = position.at(n);
    for (const auto& [w, c] : e.terms) {
      auto it = pos.find(w);
      if (it == pos.end()) throw InvariantViolation("element leaves the filtration stage");
      x[it->second] = c;
    }
    return x;
  }
};

namespace detail {

inline void enumerate_words(const CcrAlgebra& a, std::size_t k, std::uint32_t from, Word& w,
                            std::map<int, std::vector<Word>>& out, std::size_t& count, std::size_t limit) {
  if (++count > limit) throw CapExceeded("filtration stage has more than " + std::to_string(limit) + " words");
  out[a.degree(w)].push_back(w);
  if (w.size() == k) return;
  for (std::uint32_t g = from; g < a.num_generators(); ++g) {
    w.push_back(g);
    enumerate_words(a, k, a.degree(g) % 2 != 0 ? g + 1 : g, w, out, count, limit);
    w.pop_back();
  }
}

}  // namespace detail

/// F_k CCR(V): closed under the differential because rewriting never lengthens a word.
inline FiltrationStage filtration_stage(const CcrAlgebra& a, std::size_t k, std::size_t limit = 200000) {
  if (k > a.cap()) throw CapExceeded("stage length above the word cap");
  FiltrationStage st;
  st.length = k;
  Word w;
  std::size_t count = 0;
  detail::enumerate_words(a, k, 0, w, st.basis, count, limit);
  std::map<int, std::size_t> dims;
  for (auto& [n, ws] : st.basis) {
    std::sort(ws.begin(), ws.end());
    dims[n] = ws.size();
    auto& pos = st.position[n];
    for (std::size_t i = 0; i < ws.size(); ++i) pos.emplace(ws[i], i);
  }
  std::map<int, GMatrix> diffs;
  for (const auto& [n, ws] : st.basis) {
    if (!st.basis.count(n - 1)) continue;
    std::vector<std::tuple<std::size_t, std::size_t, Gaussian>> trips;
    const auto& pos = st.position.at(n - 1);
    for (std::size_t c = 0; c < ws.size(); ++c)
      for (const auto& [u, x] : a.differential(Element::term(ws[c], Gaussian(1))).terms) {
        auto it = pos.find(u);
        if (it == pos.end()) throw InvariantViolation("differential leaves the filtration stage");
        trips.emplace_back(it->second, c, x);
      }
    diffs[n] = GMatrix::from_triplets(dims.at(n - 1), ws.size(), std::move(trips));
  }
  st.complex = make_complex(std::move(dims), std::move(diffs));
  return st;
}

/// Restriction of an algebra morphism to filtration stages of equal length.
inline GMapChain stage_map(const CcrMorphism& phi, const FiltrationStage& src, const FiltrationStage& dst) {
  GMapChain f{src.complex, dst.complex, 0, {}};
  for (const auto& [n, ws] : src.basis) {
    std::vector<std::tuple<std::size_t, std::size_t, Gaussian>> trips;
    for (std::size_t c = 0; c < ws.size(); ++c) {
      auto img = phi(Element::term(ws[c], Gaussian(1)));
      if (img.is_zero()) continue;
      if (!dst.position.count(n)) throw InvariantViolation("image leaves the target stage");
      auto x = dst.coordinates(n, img);
      for (std::size_t r = 0; r < x.size(); ++r)
        if (!hqft::is_zero(x[r])) trips.emplace_back(r, c, x[r]);
    }
    f.set(n, GMatrix::from_triplets(dst.complex.dim(n), ws.size(), std::move(trips)));
  }
  return f;
}

/// H_0 of a complex with no negative degrees, as a complex with zero differential, with the
/// projection p : V -> H_0 (kills boundaries, sends chosen cycle representatives to the basis)
/// and the pairing tau_H(e_i, e_j) = tau(rep_i, rep_j).
struct ZerothHomology {
  ChainComplex h;
  MapChain projection;
  BilinearForm tau;
  std::vector<std::vector<Scalar>> representatives;
};

inline ZerothHomology zeroth_homology(const BilinearForm& tau) {
  const auto& v = tau.space;
  if (v.min_degree() < 0) throw ShapeMismatch("zeroth homology projection needs degrees >= 0");
  const std::size_t n0 = v.dim(0);
  ZerothHomology z;
  z.representatives = homology_representatives(v, 0);
  const std::size_t r = z.representatives.size();
  z.h = ChainComplex({{0, r}}, {});

  // columns of M: a basis of the boundaries, then the representatives
  std::vector<std::vector<Scalar>> cols;
  EchelonSpan<Scalar> span(n0);
  auto bt = v.diff(1).transpose();
  for (std::size_t k = 0; k < bt.rows(); ++k) {
    std::vector<Scalar> c(n0);
    for (const auto& [i, x] : bt.row(k)) c[i] = x;
    if (span.insert(c)) cols.push_back(std::move(c));
  }
  const std::size_t nb = cols.size();
  for (const auto& c : z.representatives) cols.push_back(c);
  if (cols.size() != n0) throw InvariantViolation("boundaries and representatives do not span degree 0");
  auto mt = columns_matrix(n0, cols).transpose();
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trips;
  for (std::size_t k = 0; k < r; ++k) {
    std::vector<Scalar> e(n0);
    e[nb + k] = 1;
    auto row = solve(mt, e);
    if (!row) throw InvariantViolation("singular homology basis");
    for (std::size_t i = 0; i < n0; ++i)
      if (!hqft::is_zero((*row)[i])) trips.emplace_back(k, i, (*row)[i]);
  }
  z.projection = MapChain{v, z.h, 0, {}};
  z.projection.set(0, Matrix::from_triplets(r, n0, std::move(trips)));

  z.tau = BilinearForm{z.h, 0, {}};
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) {
      Scalar x = tau(0, z.representatives[a], 0, z.representatives[b]);
      if (!hqft::is_zero(x)) t.emplace_back(a, b, x);
    }
  z.tau.set(0, 0, Matrix::from_triplets(r, r, std::move(t)));
  return z;
}

// ---------------------------------------------------------------------------------------------
// Heisenberg dg-Lie algebra and the zig-zag object

/// Homogeneous vector of a graded Gaussian space.
struct LieVector {
  int degree = 0;
  std::vector<Gaussian> v;
  bool operator==(const LieVector& o) const { return degree == o.degree && v == o.v; }
};

/// dg-Lie algebra V (+) W with W central and [v1, v2] = sum_k i beta_k(v1, v2) w_k.
struct CentralLie {
  struct Slot {
    int degree;
    std::size_t index;
    BilinearForm form;
  };

  ChainComplex v_part, w_part, complex;
  std::vector<Slot> slots;

  std::size_t w_offset(int n) const { return v_part.dim(n); }

  LieVector basis_vector(int n, std::size_t i) const {
    LieVector e{n, std::vector<Gaussian>(complex.dim(n))};
    e.v.at(i) = Gaussian(1);
    return e;
  }

  LieVector differential(const LieVector& a) const {
    const int n = a.degree;
    LieVector out{n - 1, std::vector<Gaussian>(complex.dim(n - 1))};
    auto it = complex.diffs().find(n);
    if (out.v.empty() || it == complex.diffs().end()) return out;
    const auto& d = it->second;
    for (std::size_t r = 0; r < d.rows(); ++r)
      for (const auto& [c, x] : d.row(r))
        if (!hqft::is_zero(a.v[c])) out.v[r] += a.v[c] * Gaussian(x);
    return out;
  }

  LieVector bracket(const LieVector& a, const LieVector& b) const {
    const int n = a.degree + b.degree;
    LieVector out{n, std::vector<Gaussian>(complex.dim(n))};
    const std::size_t na = v_part.dim(a.degree), nb = v_part.dim(b.degree);
    for (const auto& s : slots) {
      if (s.degree != n) continue;
      const Matrix* blk = s.form.find_block(a.degree, b.degree);
      if (!blk) continue;
      Gaussian acc;
      for (std::size_t i = 0; i < na; ++i) {
        if (hqft::is_zero(a.v[i])) continue;
        for (const auto& [j, x] : blk->row(i))
          if (j < nb && !hqft::is_zero(b.v[j])) acc += a.v[i] * b.v[j] * Gaussian(x);
      }
      out.v[w_offset(n) + s.index] += acc * Gaussian::imag_unit();
    }
    return out;
  }
};

using HeisenbergLie = CentralLie;

namespace detail {

/// Block-diagonal direct sum, first summand first in every degree.
inline ChainComplex direct_sum(const ChainComplex& a, const ChainComplex& b) {
  std::map<int, std::size_t> dims;
  for (int n : a.degrees()) dims[n] += a.dim(n);
  for (int n : b.degrees()) dims[n] += b.dim(n);
  std::map<int, Matrix> diffs;
  for (const auto& [n, d] : dims) {
    if (!dims.count(n - 1)) continue;
    Matrix da = a.diff(n), db = b.diff(n);
    Matrix m(dims.at(n - 1), d);
    auto put = [&](const Matrix& x, std::size_t r0, std::size_t c0) {
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (const auto& [c, v] : x.row(r)) m.set(r0 + r, c0 + c, v);
    };
    if (a.dim(n) > 0 && a.dim(n - 1) > 0) put(da, 0, 0);
    if (b.dim(n) > 0 && b.dim(n - 1) > 0) put(db, a.dim(n - 1), a.dim(n));
    diffs[n] = m;
  }
  return make_complex(std::move(dims), std::move(diffs));
}

}  // namespace detail

/// heis(V, tau) = V (+) C with [v1 (+) c1, v2 (+) c2] = 0 (+) i tau(v1, v2).
inline HeisenbergLie heisenberg(const BilinearForm& tau) {
  if (tau.degree != 0) throw ShapeMismatch("Heisenberg pairing must have degree 0");
  if (!tau.after_differential().is_zero()) throw NotAChainMap("tau is not a chain map");
  HeisenbergLie h;
  h.v_part = tau.space;
  h.w_part = ground(0);
  h.complex = detail::direct_sum(h.v_part, h.w_part);
  h.slots.push_back({0, 0, tau});
  return h;
}

/// H = V (+) D (+) C with D = (x -> y), x in degree 0 and y = dx in degree -1.
/// Quotient maps pi_s(v (+) c1 x + c2 y (+) c3) = v (+) (s c1 + c3) onto heis(V, tau + s d(rho)).
struct ZigZagObject {
  CentralLie h;
  BilinearForm tau, rho;
  std::array<HeisenbergLie, 2> target;
  std::array<MapChain, 2> pi;
};

inline ZigZagObject zigzag_object(const BilinearForm& tau, const BilinearForm& rho) {
  if (rho.degree != -1) throw ShapeMismatch("rho must have degree -1");
  ZigZagObject z;
  z.tau = tau;
  z.rho = rho;
  const auto drho = rho.after_differential();
  z.h.v_part = tau.space;
  // D (+) C: degree 0 = {x, c}, degree -1 = {y}
  z.h.w_part = make_complex<Scalar>({{0, 2}, {-1, 1}}, {{0, Matrix::from_triplets(1, 2, {{0, 0, Scalar(1)}})}});
  z.h.complex = detail::direct_sum(z.h.v_part, z.h.w_part);
  z.h.slots = {{0, 0, drho}, {-1, 0, rho}, {0, 1, tau}};
  for (int s : {0, 1}) {
    z.target[s] = heisenberg(s == 0 ? tau : tau + drho);
    const auto& src = z.h.complex;
    const auto& dst = z.target[s].complex;
    MapChain p{src, dst, 0, {}};
    for (int n : src.degrees()) {
      const std::size_t nv = tau.space.dim(n);
      std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trips;
      for (std::size_t i = 0; i < nv; ++i) trips.emplace_back(i, i, Scalar(1));
      if (n == 0) {
        if (s == 1) trips.emplace_back(nv, nv, Scalar(1));
        trips.emplace_back(nv, nv + 1, Scalar(1));
      }
      p.set(n, Matrix::from_triplets(dst.dim(n), src.dim(n), std::move(trips)));
    }
    z.pi[s] = std::move(p);
  }
  return z;
}

struct ZigZagReport {
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

inline nlohmann::json to_json(const ZigZagReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : r.checks) j.push_back(to_json(c));
  return j;
}

namespace detail {

inline LieVector apply(const MapChain& f, const LieVector& a) {
  LieVector out{a.degree + f.degree, std::vector<Gaussian>(f.target.dim(a.degree + f.degree))};
  auto it = f.components.find(a.degree);
  if (out.v.empty() || it == f.components.end()) return out;
  const auto& m = it->second;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (const auto& [c, x] : m.row(r))
      if (!hqft::is_zero(a.v[c])) out.v[r] += a.v[c] * Gaussian(x);
  return out;
}

inline LieVector add(LieVector a, const LieVector& b, int sign = 1) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += sign > 0 ? b.v[i] : -b.v[i];
  return a;
}

/// Global basis index of (degree, local index) in a complex.
inline std::size_t global_index(const ChainComplex& c, int n, std::size_t i) {
  std::size_t off = 0;
  for (int m : c.degrees()) {
    if (m == n) break;
    off += c.dim(m);
  }
  return off + i;
}

inline std::size_t first_difference(const LieVector& a, const LieVector& b) {
  for (std::size_t i = 0; i < a.v.size(); ++i)
    if (a.v[i] != b.v[i]) return i;
  return a.v.size();
}

/// d[a, b] = [da, b] + (-1)^{|a|} [a, db] on all basis pairs.
inline AxiomResult bracket_chain_map(const std::string& name, const CentralLie& g) {
  AxiomResult r{name, g.complex.total_dim(), {}};
  for (int m : g.complex.degrees())
    for (int n : g.complex.degrees())
      for (std::size_t i = 0; i < g.complex.dim(m); ++i)
        for (std::size_t j = 0; j < g.complex.dim(n); ++j) {
          auto a = g.basis_vector(m, i), b = g.basis_vector(n, j);
          auto lhs = g.differential(g.bracket(a, b));
          auto rhs = add(g.bracket(g.differential(a), b), g.bracket(a, g.differential(b)), koszul(m));
          if (lhs.v.empty() && rhs.v.empty()) continue;
          if (!(lhs == rhs))
            r.failures.push_back({global_index(g.complex, m, i), global_index(g.complex, n, j)});
        }
  return r;
}

/// f[a, b] = [fa, fb] on all basis pairs.
inline AxiomResult lie_morphism(const std::string& name, const MapChain& f, const CentralLie& src,
                                const CentralLie& dst) {
  AxiomResult r{name, src.complex.total_dim(), {}};
  for (int m : src.complex.degrees())
    for (int n : src.complex.degrees())
      for (std::size_t i = 0; i < src.complex.dim(m); ++i)
        for (std::size_t j = 0; j < src.complex.dim(n); ++j) {
          auto a = src.basis_vector(m, i), b = src.basis_vector(n, j);
          auto lhs = apply(f, src.bracket(a, b));
          auto rhs = dst.bracket(apply(f, a), apply(f, b));
          if (!(lhs == rhs)) r.failures.push_back({global_index(src.complex, m, i), global_index(src.complex, n, j)});
        }
  return r;
}

}  // namespace detail

/// Per s in {0, 1}: pi_s is a chain map, a bracket morphism and a quasi-isomorphism.
inline ZigZagReport verify_zigzag(const ZigZagObject& z) {
  ZigZagReport rep;
  rep.checks.push_back(detail::bracket_chain_map("bracket is a chain map", z.h));
  for (int s : {0, 1}) {
    const std::string tag = "pi" + std::to_string(s);
    const auto& p = z.pi[s];
    AxiomResult chain{tag + " chain map", z.h.complex.total_dim(), {}};
    auto b = boundary(p);
    for (const auto& [m, a] : b.components)
      for (std::size_t r = 0; r < a.rows(); ++r)
        if (!a.row(r).empty())
          chain.failures.push_back({detail::global_index(z.h.complex, m, a.row(r).front().first), r});
    rep.checks.push_back(chain);
    rep.checks.push_back(detail::lie_morphism(tag + " bracket", p, z.h, z.target[s]));
    AxiomResult qi{tag + " quasi-iso", z.h.complex.total_dim(), {}};
    if (chain.passed()) {
      auto q = quasi_iso_report(p);
      for (const auto& [n, k] : q.induced_ranks)
        if (k != q.source_ranks[n] || k != q.target_ranks[n]) qi.failures.push_back({std::size_t(n - z.h.complex.min_degree()), k});
    } else {
      qi.failures.push_back({0, 0});
    }
    rep.checks.push_back(qi);
  }
  return rep;
}

}  // namespace hqft
