#include <memory>
#include <random>

#include "catch_amalgamated.hpp"
#include "hqft/green/green.hpp"
#include "oracle.hpp"

using namespace hqft;

namespace {

std::shared_ptr<const Lattice> lattice(int nt, int nx) { return std::make_shared<const Lattice>(nt, nx, 1, 1); }

std::vector<Scalar> random_in_window(std::mt19937_64& rng, const GreenOperator& g, int margin, double density = 0.3) {
  std::bernoulli_distribution keep(density);
  std::vector<Scalar> v(g.lattice().num_cells(g.degree()));
  for (auto i : g.window_cells(margin))
    if (keep(rng)) v[i] = oracle::random_scalar(rng);
  return v;
}

// Leapfrog for the scalar stencil (u(t+1)+u(t-1)-u(x+1)-u(x-1))/h^2 - m^2 u = phi, u(0) = 0.
std::vector<Scalar> leapfrog(const Lattice& l, const Scalar& m, const std::vector<Scalar>& phi) {
  const Scalar h2 = l.dt() * l.dt();
  std::vector<Scalar> u(l.num_vertices());
  for (int t = 0; t + 1 < l.nt(); ++t)
    for (int x = 0; x < l.nx(); ++x) {
      Scalar next = h2 * (phi[l.vertex(t, x)] + m * m * u[l.vertex(t, x)]);
      if (t >= 1) next += u[l.vertex(t, x + 1)] + u[l.vertex(t, x - 1)] - u[l.vertex(t - 1, x)];
      u[l.vertex(t + 1, x)] = next;
    }
  return u;
}

bool inside_cone(const Lattice& l, int p, const std::vector<Scalar>& out, const VertexSet& cone) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_zero(out[i])) continue;
    for (auto v : l.cell_vertices(p, i))
      if (!cone[v]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero input gives zero output") {
  auto l = lattice(12, 4);
  for (auto o : {Orientation::Retarded, Orientation::Advanced}) {
    GreenOperator g(l, 0, 0, o);
    std::vector<Scalar> z(l->num_vertices());
    CHECK(g.apply(z) == z);
  }
}

TEST_CASE("retarded scalar solution matches an independent leapfrog recursion") {
  for (Scalar h : {Scalar(1), Scalar(1, 2)})
    for (Scalar m : {Scalar(0), Scalar(1)}) {
      auto l = std::make_shared<const Lattice>(12, 9, h, h);
      GreenOperator g(l, 0, m, Orientation::Retarded);
      const int t0 = 3, x0 = 4;
      auto v = l->vertex(t0, x0);
      std::vector<Scalar> phi(l->num_vertices());
      phi[v] = 1;
      auto u = g.apply(phi);
      CHECK(u == leapfrog(*l, m, phi));
      CHECK(inside_cone(*l, 0, u, l->causal_cone(l->singleton(v), Direction::Future)));
      for (int s = 0; s <= 3; ++s) {
        CHECK_FALSE(is_zero(u[l->vertex(t0 + 1 + s, x0 + s)]));
        CHECK_FALSE(is_zero(u[l->vertex(t0 + 1 + s, x0 - s)]));
      }
    }
}

TEST_CASE("G+- P = id on interior inputs") {
  auto l = lattice(12, 4);
  std::mt19937_64 rng(1);
  for (int p : {0, 1})
    for (Scalar m : {Scalar(0), Scalar(1)})
      for (auto o : {Orientation::Retarded, Orientation::Advanced}) {
        GreenOperator g(l, p, m, o);
        for (int i = 0; i < 5; ++i) {
          auto phi = random_in_window(rng, g, 2);
          CHECK(g.apply(g.op().apply(phi)) == phi);
        }
      }
}

TEST_CASE("inputs touching the boundary slices are rejected") {
  auto l = lattice(12, 4);
  GreenOperator g(l, 0, 0, Orientation::Retarded);
  std::vector<Scalar> phi(l->num_vertices());
  phi[l->vertex(0, 1)] = 1;
  CHECK_THROWS_AS(g.apply(phi), SupportViolation);
  phi[l->vertex(0, 1)] = 0;
  phi[l->vertex(11, 1)] = 1;
  CHECK_THROWS_AS(g.apply(phi), SupportViolation);
  phi[l->vertex(11, 1)] = 0;
  phi[l->vertex(1, 1)] = 1;
  CHECK_NOTHROW(g.apply(phi));
}

TEST_CASE("causal propagator identities") {
  auto l = lattice(12, 4);
  std::mt19937_64 rng(2);
  for (int p : {0, 1, 2}) {
    auto gp = causal_propagator(l, p, p == 0 ? Scalar(1) : Scalar(0));
    for (int i = 0; i < 5; ++i) {
      auto phi = random_in_window(rng, gp.ret, 2);
      auto zero = std::vector<Scalar>(phi.size());
      CHECK(gp.apply(gp.ret.op().apply(phi)) == zero);
      auto a = random_in_window(rng, gp.ret, 1), b = random_in_window(rng, gp.ret, 1);
      CHECK(l->pairing(p, a, gp.apply(b)) == -l->pairing(p, gp.apply(a), b));
      auto s = l->support(p, a);
      auto fut = l->causal_cone(s, Direction::Future), past = l->causal_cone(s, Direction::Past);
      for (std::size_t v = 0; v < fut.size(); ++v) fut[v] = fut[v] || past[v];
      CHECK(inside_cone(*l, p, gp.apply(a), fut));
    }
  }
}

TEST_CASE("full Green axiom reports at (12, 4)") {
  auto l = lattice(12, 4);
  for (Scalar m : {Scalar(0), Scalar(1)}) {
    std::vector<GreenOperator> ret, adv;
    for (int p = 0; p < 3; ++p) {
      ret.emplace_back(l, p, m, Orientation::Retarded);
      adv.emplace_back(l, p, m, Orientation::Advanced);
    }
    auto scalar = verify_green_axioms(ret[0], adv[0], nullptr, nullptr, &ret[1], &adv[1]);
    CHECK(scalar.passed());
    CHECK(scalar.get("G+P=id").basis_size == 32);
    auto one = verify_green_axioms(ret[1], adv[1], &ret[0], &adv[0], &ret[2], &adv[2]);
    CHECK(one.passed());
    CHECK(one.get("dG+=G+d").passed());
    auto two = verify_green_axioms(ret[2], adv[2], &ret[1], &adv[1]);
    CHECK(two.passed());
  }
}

TEST_CASE("a corrupted retarded operator fails axiom (i) with a located witness") {
  auto l = lattice(12, 4);
  GreenOperator gp(l, 0, 0, Orientation::Retarded), gm(l, 0, 0, Orientation::Advanced);
  Matrix bad = gp.matrix();
  const std::size_t i = l->vertex(6, 1), j = l->vertex(4, 1);
  bad.set(i, j, bad.get(i, j) + 1);
  auto rep = verify_green_axioms(gp.with_matrix(bad), gm);
  const auto& ax = rep.get("G+P=id");
  REQUIRE_FALSE(ax.passed());
  CHECK(ax.failures.front().witness_entry == i);
  CHECK_FALSE(rep.passed());
  auto js = to_json(ax);
  CHECK(js["axiom"] == "G+P=id");
  CHECK(js["failures"][0]["witness_entry"] == i);
  CHECK(js["basis_size"] == ax.basis_size);
}

TEST_CASE("memoized operator equals an independent dense constrained inverse") {
  auto l = lattice(10, 3);
  for (int p : {0, 1, 2})
    for (auto o : {Orientation::Retarded, Orientation::Advanced}) {
      GreenOperator g(l, p, 0, o);
      const std::size_t n = l->num_cells(p);
      int lo = 1 << 20, hi = -1;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, l->position(p, i));
        hi = std::max(hi, l->position(p, i));
      }
      std::vector<std::size_t> rows, cols;
      for (std::size_t i = 0; i < n; ++i) {
        int pos = l->position(p, i);
        bool ret = o == Orientation::Retarded;
        if (ret ? pos <= hi - 2 : pos >= lo + 2) rows.push_back(i);
        if (ret ? pos >= lo + 2 : pos <= hi - 2) cols.push_back(i);
      }
      REQUIRE(rows.size() == cols.size());
      auto inv = oracle::dense_inverse(g.op().submatrix(rows, cols).dense());
      for (std::size_t a = 0; a < cols.size(); ++a)
        for (std::size_t b = 0; b < rows.size(); ++b) CHECK(g.matrix().get(cols[a], rows[b]) == inv[a][b]);
    }
}

TEST_CASE("exact sequence by rank counting") {
  auto l = lattice(12, 4);
  auto gp = causal_propagator(l, 0, 1);
  const std::size_t n = l->num_vertices();
  const Matrix P = gp.ret.op();
  const Matrix G = gp.matrix();

  // ker G on the window equals P of window cochains whose image stays in the window
  auto x = gp.ret.window_cells(1);
  std::vector<std::size_t> all(n), outside;
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t i = 0; i < n; ++i)
    if (!gp.ret.cell_in_window(i, 1)) outside.push_back(i);
  std::size_t ker_g = x.size() - oracle::dense_rank(G.submatrix(all, x));
  std::size_t z = x.size() - oracle::dense_rank(P.submatrix(outside, x));
  CHECK(ker_g == z);

  // image of G on the window equals the solutions of P on the interior rows
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < n; ++i) {
    int pos = l->position(0, i);
    if (pos >= 2 && pos <= 2 * (l->nt() - 1) - 2) interior.push_back(i);
  }
  auto pg = P * G;
  for (auto r : interior)
    for (auto c : x) CHECK(is_zero(pg.get(r, c)));
  std::size_t im_g = oracle::dense_rank(G.submatrix(all, x));
  std::size_t sol = n - oracle::dense_rank(P.submatrix(interior, all));
  CHECK(im_g == sol);
  CHECK(sol == 2 * std::size_t(l->nx()));
}
