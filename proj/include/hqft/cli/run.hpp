#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqft/aqft/aqft.hpp"
#include "hqft/ccr/ccr.hpp"
#include "hqft/green/green.hpp"
#include "hqft/theory/theory.hpp"

namespace hqft::cli {

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int nt = 12, nx = 4;
  Scalar dt = 1, dx = 1;
  TheoryKind theory = TheoryKind::KG;
  Scalar mass = 0;
  int margin = 1;  // Green operator margin in slices
  std::size_t cap = 12;
  std::uint64_t seed = 1;
  std::string out;
  /// Unset: derived from the lattice by default_poset.
  std::optional<PosetParams> poset;
  std::size_t samples = 50;  // random cases per CCR property
};

inline TheoryKind parse_theory(const std::string& s) {
  if (s == "KG" || s == "kg") return TheoryKind::KG;
  if (s == "YM" || s == "ym") return TheoryKind::YM;
  throw ConfigError("unknown theory: " + s);
}

/// Nested slabs with at least 8 slices and radius-1 diamonds in the middle of the lattice.
inline PosetParams default_poset(const RunConfig& c) {
  PosetParams p;
  for (int k = 1; c.nt - 2 * k >= 8 && k <= 2; ++k) p.slab_insets.push_back(k);
  p.diamond_radius = 1;
  p.diamond_times = {c.nt / 2 - 1};
  p.diamond_stride = std::max(1, c.nx / 2);
  return p;
}

inline PosetParams poset_params(const RunConfig& c) { return c.poset ? *c.poset : default_poset(c); }

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"nt", c.nt},         {"nx", c.nx},         {"dt", to_string(c.dt)},
          {"dx", to_string(c.dx)}, {"theory", to_string(c.theory)}, {"mass", to_string(c.mass)},
          {"margin", c.margin}, {"cap", c.cap},       {"seed", c.seed},
          {"samples", c.samples}, {"poset", hqft::to_json(poset_params(c))}};
}

/// Keys of a JSON config file override the current values.
inline void apply_config(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  auto scalar = [](const nlohmann::json& v) {
    if (v.is_number_integer()) return Scalar(v.get<long>());
    if (v.is_string()) return parse_scalar(v.get<std::string>());
    throw ConfigError("rational values are integers or strings like \"1/2\"");
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "nt")
        c.nt = v.get<int>();
      else if (key == "nx")
        c.nx = v.get<int>();
      else if (key == "dt")
        c.dt = scalar(v);
      else if (key == "dx")
        c.dx = scalar(v);
      else if (key == "mass")
        c.mass = scalar(v);
      else if (key == "theory")
        c.theory = parse_theory(v.get<std::string>());
      else if (key == "margin")
        c.margin = v.get<int>();
      else if (key == "cap")
        c.cap = v.get<std::size_t>();
      else if (key == "seed")
        c.seed = v.get<std::uint64_t>();
      else if (key == "out")
        c.out = v.get<std::string>();
      else if (key == "samples")
        c.samples = v.get<std::size_t>();
      else if (key == "poset") {
        PosetParams p = default_poset(c);
        for (const auto& [pk, pv] : v.items()) {
          if (pk == "slab_insets")
            p.slab_insets = pv.get<std::vector<int>>();
          else if (pk == "diamond_radius")
            p.diamond_radius = pv.get<int>();
          else if (pk == "diamond_times")
            p.diamond_times = pv.get<std::vector<int>>();
          else if (pk == "diamond_stride")
            p.diamond_stride = pv.get<int>();
          else
            throw ConfigError("unknown poset key: " + pk);
        }
        c.poset = p;
      } else
        throw ConfigError("unknown config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file is not JSON: " + std::string(e.what()));
  }
  apply_config(c, j);
}

inline void validate(const RunConfig& c) {
  if (c.nt < 8) throw ConfigError("nt must be at least 8");
  if (c.nx < 3) throw ConfigError("nx must be at least 3");
  if (c.dt <= 0 || c.dx <= 0) throw ConfigError("dt and dx must be positive");
  if (c.dt != c.dx) throw ConfigError("the lattice needs dt = dx");
  if (c.mass < 0) throw ConfigError("mass must be nonnegative");
  if (c.theory == TheoryKind::YM && c.mass != 0) throw ConfigError("YM is massless");
  if (c.margin < 1) throw ConfigError("margin must be at least 1");
  if (c.cap < 2) throw ConfigError("cap must be at least 2");
  try {
    auto l = std::make_shared<const Lattice>(c.nt, c.nx, c.dt, c.dx);
    build_region_poset(l, poset_params(c));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("poset: ") + e.what());
  }
}

/// One verification suite: named checks, each with its failure count and details.
struct Suite {
  std::string name;
  nlohmann::json checks = nlohmann::json::array();
  bool passed = true;

  void add(const std::string& check, bool ok, nlohmann::json detail = nullptr) {
    nlohmann::json j = {{"check", check}, {"passed", ok}};
    if (!detail.is_null()) j["detail"] = std::move(detail);
    checks.push_back(std::move(j));
    passed = passed && ok;
  }
};

inline nlohmann::json to_json(const Suite& s) { return {{"suite", s.name}, {"passed", s.passed}, {"checks", s.checks}}; }

namespace detail {

/// Portable draws: mt19937_64 output is fixed by the standard, distributions are not.
struct Draw {
  std::mt19937_64 rng;
  explicit Draw(std::uint64_t seed) : rng(seed) {}
  std::uint64_t below(std::uint64_t n) { return rng() % n; }
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }
  Scalar scalar() {
    auto num = static_cast<long>(below(7)) - 3;
    auto den = static_cast<long>(below(3)) + 1;
    return Scalar(num) / den;
  }
};

inline Matrix sparse_matrix(Draw& d, std::size_t r, std::size_t c, std::uint64_t per_mille) {
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (d.chance(per_mille, 1000)) t.emplace_back(i, j, d.scalar());
  auto m = Matrix::from_triplets(r, c, std::move(t));
  return m;
}

/// Local operator 0-forms -> 1-forms on vertices at half-unit position in [lo, T - lo].
inline Matrix local_operator(Draw& d, const Lattice& l, int lo) {
  const int top = 2 * (l.nt() - 1);
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  for (std::size_t v = 0; v < l.num_vertices(); ++v) {
    int pos = l.position(0, v);
    if (pos < lo || pos > top - lo) continue;
    auto [tt, x] = l.cell_tx(0, v);
    for (auto e : {l.time_edge(tt, x), l.space_edge(tt, x)})
      if (auto k = d.scalar(); !is_zero(k)) t.emplace_back(e, v, k);
  }
  return Matrix::from_triplets(l.num_edges(), l.num_vertices(), std::move(t));
}

inline nlohmann::json failures_json(const AxiomResult& a) {
  nlohmann::json j = {{"basis_size", a.basis_size}, {"failures", a.failures.size()}};
  if (!a.failures.empty())
    j["first_witness"] = {a.failures.front().input_index, a.failures.front().witness_entry};
  return j;
}

inline void add_axioms(Suite& s, const std::vector<AxiomResult>& axioms, const std::string& prefix = "") {
  for (const auto& a : axioms) s.add(prefix + a.axiom, a.passed(), failures_json(a));
}

inline Word random_word(Draw& d, const CcrAlgebra& a, std::size_t max_len) {
  Word w(1 + d.below(max_len));
  for (auto& g : w) g = std::uint32_t(d.below(a.num_generators()));
  return w;
}

inline Element random_element(Draw& d, const CcrAlgebra& a, std::size_t max_len) {
  Element e;
  for (int k = 0; k < 2; ++k) e.add(a.normal_form(random_word(d, a, max_len)), Gaussian(d.scalar(), d.scalar()));
  return e;
}

}  // namespace detail

/// Everything a pipeline needs about one theory on one lattice.
struct Context {
  RunConfig config;
  std::shared_ptr<const Lattice> lattice;
  ObservablesComplex obs;
  Trivialization plus, minus;
  BilinearForm tau;

  explicit Context(const RunConfig& c)
      : config(c),
        lattice(std::make_shared<const Lattice>(c.nt, c.nx, c.dt, c.dx)),
        obs(observables_complex(make_theory(c.theory, lattice, c.mass))),
        plus(standard_trivialization(obs, Orientation::Retarded)),
        minus(standard_trivialization(obs, Orientation::Advanced)),
        tau(unshifted_poisson(obs, plus, minus).tau) {}
};

inline Suite green_suite(const Context& ctx) {
  Suite s{"green"};
  const auto& c = ctx.config;
  std::vector<GreenOperator> ret, adv;
  for (int p = 0; p < 3; ++p) {
    ret.push_back(green_operator(ctx.lattice, p, c.mass, Orientation::Retarded, c.margin));
    adv.push_back(green_operator(ctx.lattice, p, c.mass, Orientation::Advanced, c.margin));
  }
  detail::add_axioms(s, verify_green_axioms(ret[0], adv[0], nullptr, nullptr, &ret[1], &adv[1]).axioms, "p0 ");
  detail::add_axioms(s, verify_green_axioms(ret[1], adv[1], &ret[0], &adv[0], &ret[2], &adv[2]).axioms, "p1 ");
  detail::add_axioms(s, verify_green_axioms(ret[2], adv[2], &ret[1], &adv[1]).axioms, "p2 ");
  return s;
}

inline Suite trivialization_suite(const Context& ctx) {
  Suite s{"trivialization"};
  detail::add_axioms(s, verify_trivialization(ctx.obs, ctx.plus, ctx.minus).checks);
  return s;
}

/// KG: the degree-2 chains of the pc complex vanish, so the trivialization is unique.
/// YM: a seeded compatible perturbation keeps every identity and moves tau by a boundary.
inline Suite compatibility_suite(const Context& ctx) {
  Suite s{"compatibility"};
  if (!ctx.obs.spec.has_ghosts()) {
    std::size_t dim = 0;
    for (int n : ctx.obs.pc.degrees()) dim += ctx.obs.pc.dim(n) * ctx.obs.pc.dim(n + 2);
    s.add("trivialization unique", dim == 0, {{"degree-2 chain dimension", dim}});
    return s;
  }
  detail::Draw d(ctx.config.seed);
  auto [lp, lm] = compatible_perturbation(ctx.obs, detail::local_operator(d, *ctx.lattice, 6));
  auto p2 = perturb_trivialization(ctx.plus, lp), m2 = perturb_trivialization(ctx.minus, lm);
  detail::add_axioms(s, verify_trivialization(ctx.obs, p2, m2).checks, "perturbed ");
  auto tt = unshifted_poisson(ctx.obs, p2, m2, true).tau;
  try {
    auto rho = homotopy_between_taus(ctx.tau, tt);
    s.add("tau~ - tau = d rho", rho.after_differential() == tt - ctx.tau);
    s.add("rho antisymmetric", rho.braided() == rho.scaled(-1));
  } catch (const Absent& e) {
    s.add("tau~ - tau = d rho", false, e.what());
  }
  return s;
}

inline Suite poisson_suite(const Context& ctx) {
  Suite s{"poisson"};
  s.add("graded antisymmetric", (ctx.tau + ctx.tau.braided()).is_zero());
  s.add("chain map", ctx.tau.after_differential().is_zero());
  // tau_00(a, b) = -<a, G b> with the causal propagator on the field degree
  const auto& spec = ctx.obs.spec;
  auto g = causal_propagator(ctx.lattice, spec.f0, ctx.config.mass, ctx.config.margin);
  auto cells = ctx.obs.cells(0);
  auto blk = ctx.tau.block(0, 0);
  bool ok = true;
  const auto n = ctx.obs.L.dim(0);
  for (std::size_t j = 0; j < n && ok; ++j) {
    std::vector<Scalar> e(n);
    e[j] = 1;
    auto gb = g.apply(ctx.obs.to_lattice(0, e));
    for (std::size_t i = 0; i < n && ok; ++i) {
      std::vector<Scalar> a(n);
      a[i] = 1;
      ok = blk.get(i, j) == -ctx.lattice->pairing(spec.f0, ctx.obs.to_lattice(0, a), gb);
    }
  }
  s.add("tau_00 = -<a, G b>", ok, {{"basis_size", n}});
  return s;
}

inline Suite ccr_suite(const Context& ctx) {
  Suite s{"ccr"};
  CcrAlgebra a(ctx.obs.L, ctx.tau, ctx.config.cap);
  detail::Draw d(ctx.config.seed + 1);
  const std::size_t len = std::min<std::size_t>(6, ctx.config.cap);
  const std::size_t n = ctx.config.samples;
  std::size_t bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    auto w = detail::random_word(d, a, len);
    bad += a.normal_form(w, ReductionStrategy::Leftmost) != a.normal_form(w, ReductionStrategy::Rightmost);
  }
  s.add("confluence", bad == 0, {{"samples", n}, {"failures", bad}});
  const std::size_t short_len = std::max<std::size_t>(1, len / 3);
  bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    auto x = detail::random_element(d, a, short_len), y = detail::random_element(d, a, short_len),
         z = detail::random_element(d, a, short_len);
    bad += a.multiply(a.multiply(x, y), z) != a.multiply(x, a.multiply(y, z));
  }
  s.add("associativity", bad == 0, {{"samples", n}, {"failures", bad}});
  std::size_t bad_d2 = 0, bad_leibniz = 0, bad_star = 0;
  for (std::size_t k = 0; k < n; ++k) {
    auto x = a.normal_form(detail::random_word(d, a, short_len));
    auto y = a.normal_form(detail::random_word(d, a, short_len));
    bad_d2 += !a.differential(a.differential(x)).is_zero();
    auto deg = a.degree(x);
    auto lhs = a.differential(a.multiply(x, y));
    auto rhs = a.multiply(a.differential(x), y) + a.multiply(x, a.differential(y)).scaled(Gaussian(koszul(*deg)));
    bad_leibniz += lhs != rhs;
    bad_star += a.involution(a.differential(x)) != a.differential(a.involution(x));
  }
  s.add("d^2 = 0", bad_d2 == 0, {{"samples", n}, {"failures", bad_d2}});
  s.add("graded Leibniz", bad_leibniz == 0, {{"samples", n}, {"failures", bad_leibniz}});
  s.add("d commutes with *", bad_star == 0, {{"samples", n}, {"failures", bad_star}});
  // generator commutators reproduce i tau
  bool ok = true;
  for (std::uint32_t g = 0; g < a.num_generators() && ok; ++g)
    for (std::uint32_t h = 0; h < a.num_generators() && ok; ++h)
      ok = a.graded_commutator(a.gen(g), a.gen(h)) == Element::unit(Gaussian(Scalar(0), a.tau(g, h)));
  s.add("commutators = i tau", ok, {{"generators", a.num_generators()}});
  return s;
}

inline void add_aqft_report(Suite& s, const std::string& name, const AqftReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : r.checks)
    if (c.status == "fail") failures.push_back(hqft::to_json(c));
  s.add(name, r.passed(),
        {{"pass", r.count("pass")}, {"fail", r.count("fail")}, {"skipped", r.count("skipped")},
         {"informational", r.count("informational")}, {"failures", failures}});
}

inline Suite aqft_suite(const Context& ctx) {
  Suite s{"aqft"};
  auto poset = build_region_poset(ctx.lattice, poset_params(ctx.config));
  auto f = observables_functor(ctx.config.theory, ctx.config.mass, poset);
  add_aqft_report(s, "functoriality", check_functoriality(f));
  add_aqft_report(s, "trivialization naturality", check_trivialization_naturality(f));
  auto q = quantize_functor(f, ctx.config.cap);
  add_aqft_report(s, "einstein causality", check_einstein_causality(f, &q.algebra(RegionPoset::terminal())));
  try {
    add_aqft_report(s, "time slice", check_time_slice(f));
  } catch (const NoCauchyInclusion& e) {
    s.checks.push_back({{"check", "time slice"}, {"passed", true}, {"detail", {{"skipped", e.what()}}}});
  }
  return s;
}

/// Ranks of H(L) by two elimination methods.
inline Suite homology_suite(const Context& ctx, nlohmann::json* table = nullptr) {
  Suite s{"homology"};
  auto sparse = homology_ranks(ctx.obs.L, RankMethod::Sparse);
  auto bareiss = homology_ranks(ctx.obs.L, RankMethod::Bareiss);
  nlohmann::json rows = nlohmann::json::array();
  bool agree = true;
  for (int n : ctx.obs.L.degrees()) {
    rows.push_back({{"degree", n}, {"dim", ctx.obs.L.dim(n)}, {"rank", sparse.rank(n)}});
    agree = agree && sparse.rank(n) == bareiss.rank(n);
  }
  s.add("rank methods agree", agree, {{"ranks", rows}});
  if (ctx.config.theory == TheoryKind::KG) {
    s.add("H0 = 2 Nx", sparse.rank(0) == std::size_t(2 * ctx.config.nx));
    s.add("H1 = 0", sparse.rank(1) == 0);
  } else {
    s.add("H2 = 0", sparse.rank(2) == 0);
    s.add("H1 = 1", sparse.rank(1) == 1);
    s.add("H-1 = 1", sparse.rank(-1) == 1);
  }
  if (table) *table = rows;
  return s;
}

/// Zig-zag suite with rho = 0 and, when the pairing space allows it, a seeded sparse rho.
inline Suite zigzag_suite(const Context& ctx) {
  Suite s{"zigzag"};
  const auto& L = ctx.obs.L;
  auto run = [&](const std::string& tag, const BilinearForm& rho) {
    auto rep = verify_zigzag(zigzag_object(ctx.tau, rho));
    for (const auto& c : rep.checks) s.add(tag + " " + c.axiom, c.passed(), detail::failures_json(c));
  };
  run("rho=0", BilinearForm{L, -1, {}});
  if (L.dim(0) > 0 && L.dim(-1) > 0) {
    detail::Draw d(ctx.config.seed + 2);
    BilinearForm rho{L, -1, {}};
    auto r = detail::sparse_matrix(d, L.dim(0), L.dim(-1), 50);
    rho.set(0, -1, r);
    rho.set(-1, 0, r.transpose().scaled(-1));
    run("rho=random", rho);
  } else {
    s.checks.push_back({{"check", "rho=random"}, {"passed", true}, {"detail", "no degree -1 pairing for this theory"}});
  }
  return s;
}

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;
  std::string summary;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"verify-kg", "verify-ym", "homology", "zigzag", "report"};
  return c;
}

/// Runs a command on a validated config. Exit 0 when every suite passes, 1 otherwise.
inline RunResult run(const std::string& command, RunConfig config) {
  if (command == "verify-kg") config.theory = TheoryKind::KG;
  if (command == "verify-ym") {
    config.theory = TheoryKind::YM;
    config.mass = 0;
  }
  if (std::find(commands().begin(), commands().end(), command) == commands().end())
    throw ConfigError("unknown command: " + command);
  validate(config);
  Context ctx(config);
  std::vector<Suite> suites;
  nlohmann::json table;
  // a suite that throws is recorded as failed and the run continues
  auto guarded = [&](const std::string& name, const std::function<Suite()>& suite) {
    try {
      suites.push_back(suite());
    } catch (const std::exception& e) {
      Suite s{name};
      s.add("completed", false, {{"error", e.what()}});
      suites.push_back(std::move(s));
    }
  };
  auto pipeline = [&] {
    guarded("green", [&] { return green_suite(ctx); });
    guarded("trivialization", [&] { return trivialization_suite(ctx); });
    guarded("compatibility", [&] { return compatibility_suite(ctx); });
    guarded("poisson", [&] { return poisson_suite(ctx); });
    guarded("ccr", [&] { return ccr_suite(ctx); });
    guarded("aqft", [&] { return aqft_suite(ctx); });
  };
  auto homology = [&] { guarded("homology", [&] { return homology_suite(ctx, &table); }); };
  auto zigzag = [&] { guarded("zigzag", [&] { return zigzag_suite(ctx); }); };
  if (command == "verify-kg" || command == "verify-ym") {
    pipeline();
  } else if (command == "homology") {
    homology();
  } else if (command == "zigzag") {
    zigzag();
  } else {
    pipeline();
    homology();
    zigzag();
  }
  RunResult r;
  bool passed = true;
  nlohmann::json js = nlohmann::json::array();
  std::ostringstream out;
  out << command << " " << to_string(config.theory) << " (" << config.nt << "x" << config.nx << ")\n";
  for (const auto& s : suites) {
    passed = passed && s.passed;
    js.push_back(to_json(s));
    std::size_t ok = 0;
    for (const auto& c : s.checks) ok += c["passed"].get<bool>();
    out << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << ok << "/" << s.checks.size() << ")\n";
    for (const auto& c : s.checks)
      if (!c["passed"].get<bool>()) out << "  failed: " << c["check"].get<std::string>() << "\n";
  }
  if (!table.is_null()) {
    out << "degree  dim  rank\n";
    for (const auto& row : table)
      out << std::setw(6) << row["degree"].get<int>() << std::setw(5) << row["dim"].get<std::size_t>()
          << std::setw(6) << row["rank"].get<std::size_t>() << "\n";
  }
  r.exit_code = passed ? 0 : 1;
  r.report = {{"schema_version", kSchemaVersion}, {"command", command}, {"config", to_json(config)},
              {"passed", passed}, {"suites", js}};
  if (!table.is_null()) r.report["homology"] = table;
  r.summary = out.str();
  return r;
}

}  // namespace hqft::cli
