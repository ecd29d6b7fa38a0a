#include <algorithm>
#include <random>

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "hqft/aqft/aqft.hpp"
#include "hqft/green/green.hpp"

using namespace hqft;
using fixtures::lattice;

namespace {

/// Full lattice, slabs [1,10] and [2,9], and radius-1 diamonds with past tips at x = 0, 3.
PosetParams standard_params(std::vector<int> times = {4}) {
  PosetParams p;
  p.slab_insets = {1, 2};
  p.diamond_radius = 1;
  p.diamond_times = std::move(times);
  p.diamond_stride = 3;
  return p;
}

RegionFunctor functor(TheoryKind k, std::vector<int> times = {4}) {
  auto poset = build_region_poset(lattice(12, 6), standard_params(std::move(times)));
  return observables_functor(k, k == TheoryKind::KG ? Scalar(1) : Scalar(0), poset);
}

std::size_t find_region(const RegionPoset& p, const Region& r) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.regions[i] == r) return i;
  FAIL("region missing: " << r.describe());
  return 0;
}

/// Any two distinct diamonds count as disjoint.
bool shrunken_cone(const RegionPoset& p, std::size_t a, std::size_t b) {
  return p.regions[a].kind == Region::Kind::Diamond && p.regions[b].kind == Region::Kind::Diamond;
}

}  // namespace

TEST_CASE("region poset structure") {
  auto l = lattice(12, 6);
  auto p = build_region_poset(l, standard_params({2, 6}));
  REQUIRE(p.size() == 7);
  CHECK(p.regions[0] == Region::slab(0, 11));
  auto s1 = find_region(p, Region::slab(1, 10)), s2 = find_region(p, Region::slab(2, 9));
  auto d20 = find_region(p, Region::diamond(2, 0, 1)), d23 = find_region(p, Region::diamond(2, 3, 1));
  auto d60 = find_region(p, Region::diamond(6, 0, 1));
  CHECK(p.includes(s2, s1));
  CHECK(p.includes(s1, 0));
  CHECK_FALSE(p.includes(s1, s2));
  CHECK(p.cauchy[s2][s1]);
  CHECK(p.cauchy[s1][0]);
  CHECK(p.includes(d20, s1));
  CHECK(p.includes(d20, s2));
  CHECK_FALSE(p.cauchy[d20][0]);
  // spacelike neighbours on the circle of 6 sites are disjoint; stacked diamonds are not
  CHECK(p.disjoint[d20][d23]);
  CHECK(p.disjoint[d23][d20]);
  CHECK_FALSE(p.disjoint[d20][d60]);
  CHECK_FALSE(p.disjoint[s2][d20]);
  // every inclusion agrees with vertex containment
  for (const auto& [a, b] : p.inclusions)
    for (std::size_t v = 0; v < l->num_vertices(); ++v) CHECK((!p.vertices[a][v] || p.vertices[b][v]));
}

TEST_CASE("poset construction errors") {
  auto l = lattice(12, 6);
  PosetParams thin;
  thin.slab_insets = {3};  // six slices
  CHECK_THROWS_AS(build_region_poset(l, thin), RegionTooSmall);
  PosetParams flat;
  flat.diamond_times = {2};
  CHECK_THROWS_AS(build_region_poset(l, flat), RegionTooSmall);
  PosetParams tall;
  tall.diamond_radius = 6;
  tall.diamond_times = {0};
  CHECK_THROWS_AS(build_region_poset(l, tall), BadDims);
  PosetParams twice;
  twice.slab_insets = {1, 1};
  CHECK_THROWS_AS(build_region_poset(l, twice), BadDims);
}

TEST_CASE("time slice needs a Cauchy inclusion") {
  PosetParams p;
  p.diamond_radius = 1;
  p.diamond_times = {4};
  p.diamond_stride = 3;
  auto f = observables_functor(TheoryKind::KG, 1, build_region_poset(lattice(12, 6), p));
  CHECK_THROWS_AS(check_time_slice(f), NoCauchyInclusion);
}

TEST_CASE("region complexes") {
  auto f = functor(TheoryKind::KG);
  const auto& amb = *f.poset.lattice;
  // slabs carry the theory of a shorter lattice
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = f.regions[i];
    REQUIRE(r.obs);
    const int nt = r.region.t1 - r.region.t0 + 1;
    auto own = observables_complex(make_theory(TheoryKind::KG, lattice(nt, 6), 1));
    for (int n : own.L.degrees()) CHECK(r.L.dim(n) == own.L.dim(n));
  }
  // the radius-1 diamond keeps its in-window vertices and the one vertex whose stencil fits
  for (std::size_t i = 3; i < 5; ++i) {
    const auto& r = f.regions[i];
    CHECK(r.L.dim(0) == 5);
    REQUIRE(r.L.dim(1) == 1);
    auto [t, x] = amb.cell_tx(0, r.cells.at(1)[0]);
    CHECK(t == r.region.apex_t + 1);
    CHECK(x == r.region.apex_x);
    for (int n : r.L.degrees())
      for (auto c : r.cells.at(n))
        for (auto v : amb.cell_vertices(0, c)) CHECK(f.poset.vertices[i][v]);
  }
  auto ym = functor(TheoryKind::YM);
  for (std::size_t i = 3; i < 5; ++i) {
    const auto& r = ym.regions[i];
    CHECK(r.L.dim(-1) == 5);
    CHECK(r.L.dim(0) == 4);  // edges with both ends in the diamond
    CHECK(r.L.dim(1) == 0);  // no face fits
    CHECK(r.L.dim(2) == 0);
  }
}

TEST_CASE("functoriality and tau naturality") {
  for (auto k : {TheoryKind::KG, TheoryKind::YM}) {
    auto f = functor(k);
    auto rep = check_functoriality(f);
    CHECK(rep.passed());
    CHECK(rep.count("pass") == rep.checks.size());
    // 9 inclusions, two checks each, and 7 composable pairs
    CHECK(rep.checks.size() == 25);
    auto triv = check_trivialization_naturality(f);
    CHECK(triv.passed());
    CHECK(triv.checks.size() == 6);
  }
}

TEST_CASE("slab tau matches the ambient tau at shifted cells") {
  auto f = functor(TheoryKind::KG);
  const auto& amb = f.ambient();
  const auto& slab = f.regions[2];  // [2,9]
  const Lattice& sub = slab.obs->lattice();
  auto amb_cells = amb.obs->cells(0);
  auto where = [&](std::size_t sub_vertex) {
    auto [t, x] = sub.cell_tx(0, sub_vertex);
    auto it = std::find(amb_cells.begin(), amb_cells.end(), f.poset.lattice->vertex(t + 2, x));
    REQUIRE(it != amb_cells.end());
    return std::size_t(it - amb_cells.begin());
  };
  auto sub_cells = slab.obs->cells(0);
  auto t_sub = slab.tau.block(0, 0), t_amb = amb.tau.block(0, 0);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < sub_cells.size(); ++i)
    for (std::size_t j = 0; j < sub_cells.size(); ++j) {
      CHECK(t_sub.get(i, j) == t_amb.get(where(sub_cells[i]), where(sub_cells[j])));
      nonzero += !is_zero(t_sub.get(i, j));
    }
  CHECK(nonzero > 0);
}

TEST_CASE("einstein causality") {
  for (auto k : {TheoryKind::KG, TheoryKind::YM}) {
    auto f = functor(k, {2, 6});
    auto rep = check_einstein_causality(f);
    CHECK(rep.passed());
    // diamonds at equal times and different sites: two pairs
    CHECK(rep.count("pass") == 2);
    auto q = quantize_functor(f);
    CHECK(check_einstein_causality(f, &q.algebra(0)).passed());
  }
  // oracle: the ambient causal propagator vanishes between the two diamonds
  auto f = functor(TheoryKind::KG);
  const auto& l = f.poset.lattice;
  auto g = causal_propagator(l, 0, 1).matrix();
  std::size_t checked = 0;
  for (std::size_t u = 0; u < l->num_vertices(); ++u)
    for (std::size_t v = 0; v < l->num_vertices(); ++v)
      if (f.poset.vertices[3][u] && f.poset.vertices[4][v]) {
        CHECK(is_zero(g.get(u, v)));
        ++checked;
      }
  CHECK(checked == 25);
}

TEST_CASE("a shrunken cone exposes causal pairs") {
  for (auto k : {TheoryKind::KG, TheoryKind::YM}) {
    auto f = functor(k, {2, 6});
    auto rep = check_einstein_causality(f, nullptr, shrunken_cone);
    CHECK_FALSE(rep.passed());
    std::size_t failures = 0;
    for (const auto& c : rep.checks) {
      if (c.status != "fail") continue;
      ++failures;
      // only causally related pairs fail
      CHECK_FALSE(f.poset.disjoint[c.sub][c.super]);
      REQUIRE(c.witness);
      CHECK(to_json(c).contains("witness"));
    }
    // stacked and diagonal diamond pairs
    CHECK(failures == 4);
    auto q = quantize_functor(f);
    CHECK_FALSE(check_einstein_causality(f, &q.algebra(0), shrunken_cone).passed());
  }
}

TEST_CASE("time slice") {
  for (auto k : {TheoryKind::KG, TheoryKind::YM}) {
    auto f = functor(k);
    auto rep = check_time_slice(f);
    CHECK(rep.passed());
    CHECK(rep.count("pass") == 3);
    CHECK(rep.count("informational") == 6);
  }
  // diamonds see only part of the solution space
  auto f = functor(TheoryKind::KG);
  auto q = quasi_iso_report(f.push(3, 0));
  CHECK(q.source_ranks[0] == 4);
  CHECK(q.target_ranks[0] == 12);
  CHECK_FALSE(q.quasi_iso);
}

TEST_CASE("a broken pushforward fails the time slice") {
  auto f = functor(TheoryKind::KG);
  // the [1,10] pushforward forgets degree 0
  auto& p = f.pushforward.at({1, 0});
  p.set(0, Matrix(p.target.dim(0), p.source.dim(0)));
  auto rep = check_time_slice(f);
  CHECK_FALSE(rep.passed());
  CHECK_FALSE(check_functoriality(f).passed());
}

TEST_CASE("quantized functor") {
  auto f = functor(TheoryKind::KG);
  auto q = quantize_functor(f);
  REQUIRE(q.algebras.size() == 5);
  CHECK(q.morphisms.size() == 9);
  std::mt19937_64 rng(7);
  const auto& src = q.algebra(2);
  std::uniform_int_distribution<std::uint32_t> gen(0, std::uint32_t(src.num_generators() - 1));
  for (int trial = 0; trial < 20; ++trial) {
    Element x = src.gen(gen(rng)), y = src.gen(gen(rng));
    x = src.multiply(x, src.gen(gen(rng)));
    // functoriality along [2,9] -> [1,10] -> full
    auto direct = q.morphism(2, 0)(x), two_step = q.morphism(1, 0)(q.morphism(2, 1)(x));
    CHECK(direct == two_step);
    // multiplicative and compatible with d and the involution
    const auto& m = q.morphism(2, 0);
    const auto& dst = q.algebra(0);
    CHECK(m(src.multiply(x, y)) == dst.multiply(m(x), m(y)));
    CHECK(m(src.differential(x)) == dst.differential(m(x)));
    CHECK(m(src.involution(x)) == dst.involution(m(x)));
  }
}

TEST_CASE("algebra-level time slice") {
  auto f = functor(TheoryKind::KG);
  auto q = quantize_functor(f);
  for (std::size_t k : {1, 2}) {
    auto rep = check_algebra_time_slice(q, k);
    CHECK(rep.checks.size() == 3);
    CHECK(rep.passed());
  }
}

TEST_CASE("report json") {
  auto f = functor(TheoryKind::KG);
  auto j = to_json(check_time_slice(f));
  REQUIRE(j.is_array());
  for (const auto& c : j) {
    CHECK(c.contains("axiom"));
    CHECK(c.contains("region_pair"));
    CHECK(c.contains("status"));
  }
  CHECK(to_json(f.poset)["regions"].size() == 5);
}

TEST_CASE("a poset with only the full slab") {
  auto p = build_region_poset(lattice(12, 6), PosetParams{});
  CHECK(p.size() == 1);
  CHECK(p.inclusions.empty());
  CHECK(p.includes(0, 0));
  auto f = observables_functor(TheoryKind::YM, 0, p);
  // the full region is the ambient theory
  auto own = observables_complex(make_theory(TheoryKind::YM, lattice(12, 6), 0));
  for (int n : own.L.degrees()) CHECK(f.ambient().L.dim(n) == own.L.dim(n));
  CHECK(f.ambient().tau == standard_poisson(own).tau);
  CHECK_THROWS_AS(check_time_slice(f), NoCauchyInclusion);
}

TEST_CASE("quantized morphisms keep the unit and the ambient commutators") {
  auto f = functor(TheoryKind::YM);
  auto q = quantize_functor(f);
  for (const auto& [ij, m] : q.morphisms) CHECK((*m)(q.algebra(ij.first).unit()) == q.algebra(ij.second).unit());
  const auto& a = q.algebra(0);
  auto own = observables_complex(make_theory(TheoryKind::YM, lattice(12, 6), 0));
  auto g = causal_propagator(own.spec.lattice, own.spec.f0, 0).matrix();
  // degree-0 generators commute to -i <a, G b> with the edge propagator
  auto cells = own.cells(0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    auto i = pick(rng), j = pick(rng);
    std::vector<Scalar> ei(cells.size()), ej(cells.size());
    ei[i] = 1;
    ej[j] = 1;
    Scalar expected = -own.lattice().pairing(own.spec.f0, own.to_lattice(0, ei), g.apply(own.to_lattice(0, ej)));
    CHECK(a.graded_commutator(a.gen(a.index(0, i)), a.gen(a.index(0, j))) ==
          Element::unit(Gaussian(Scalar(0), expected)));
  }
}
