#pragma once

// Shared lattice fixtures for the theory, ccr, aqft and acceptance suites.

#include <memory>
#include <random>
#include <tuple>
#include <vector>

#include "hqft/lattice/lattice.hpp"
#include "hqft/theory/theory.hpp"
#include "oracle.hpp"

namespace fixtures {

using hqft::Lattice;
using hqft::Matrix;
using hqft::Scalar;

inline std::shared_ptr<const Lattice> lattice(int nt, int nx) { return std::make_shared<const Lattice>(nt, nx, 1, 1); }

/// Random operator 0-forms -> 1-forms coupling each vertex to its outgoing edges, on vertices
/// whose half-unit position lies in [lo, T - lo].
inline Matrix random_local_operator(std::mt19937_64& rng, const Lattice& l, int lo) {
  std::uniform_int_distribution<int> coeff(-3, 3);
  const int top = 2 * (l.nt() - 1);
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  for (std::size_t v = 0; v < l.num_vertices(); ++v) {
    int pos = l.position(0, v);
    if (pos < lo || pos > top - lo) continue;
    auto [tt, x] = l.cell_tx(0, v);
    for (auto e : {l.time_edge(tt, x), l.space_edge(tt, x)})
      if (int k = coeff(rng)) t.emplace_back(e, v, Scalar(k));
  }
  return Matrix::from_triplets(l.num_edges(), l.num_vertices(), std::move(t));
}

inline std::vector<Scalar> random_vector(std::mt19937_64& rng, std::size_t n, double density = 0.5) {
  std::bernoulli_distribution keep(density);
  std::vector<Scalar> v(n);
  for (auto& x : v)
    if (keep(rng)) x = oracle::random_scalar(rng);
  return v;
}

/// Observables of a theory with its standard unshifted Poisson structure.
struct PoissonFixture {
  std::shared_ptr<const Lattice> l;
  hqft::ObservablesComplex o;
  hqft::BilinearForm tau;
};

inline PoissonFixture poisson(hqft::TheoryKind k, int nt, int nx, const Scalar& mass = 0) {
  auto l = lattice(nt, nx);
  auto o = hqft::observables_complex(hqft::make_theory(k, l, mass));
  auto tau = hqft::standard_poisson(o).tau;
  return {l, std::move(o), std::move(tau)};
}

}  // namespace fixtures
