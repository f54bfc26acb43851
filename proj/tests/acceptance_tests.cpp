// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Tolerances are pinned here, in code.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "symot/involution.hpp"
#include "symot/mmot.hpp"
#include "symot/monotone.hpp"
#include "symot/regularize.hpp"
#include "test_util.hpp"

using namespace symot;
using tu::v1;
using tu::v2;

namespace {

struct Verdict {
  bool pass = true;
  void also(bool ok) { pass = pass && ok; }
};

void announce(int number, const char* name, bool pass) {
  std::printf("[ACCEPT] criterion %d (%s): %s\n", number, name, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
}

struct SeededInstance {
  std::string family;
  int d, n, N;
  std::uint64_t seed;
};

// The 20 seeded duality instances: every cost family where defined,
// d in {1,2}, n in {3..6}, N in {2,3}.
const std::vector<SeededInstance>& duality_instances() {
  static const std::vector<SeededInstance> kList = {
      {"quadratic", 1, 3, 2, 1001},   {"quadratic", 2, 4, 2, 1002},
      {"quadratic", 1, 5, 3, 1003},   {"quadratic", 2, 6, 2, 1004},
      {"quadratic", 2, 3, 3, 1005},   {"plakhov", 1, 3, 2, 1006},
      {"plakhov", 1, 4, 2, 1007},     {"plakhov", 1, 5, 2, 1008},
      {"plakhov", 1, 6, 2, 1009},     {"coulomb", 1, 4, 2, 1010},
      {"coulomb", 2, 5, 2, 1011},     {"coulomb", 1, 6, 2, 1012},
      {"coulomb", 1, 4, 3, 1013},     {"coulomb", 2, 6, 3, 1014},
      {"vectorfield", 1, 3, 2, 1015}, {"vectorfield", 2, 4, 2, 1016},
      {"vectorfield", 1, 5, 2, 1017}, {"vectorfield", 2, 5, 3, 1018},
      {"vectorfield", 1, 6, 3, 1019}, {"vectorfield", 2, 6, 2, 1020}};
  return kList;
}

CostTable instantiate(const SeededInstance& si, SupportPtr* out_sup = nullptr) {
  auto sup = tu::random_cloud(si.n, si.d, si.seed);
  if (out_sup) *out_sup = sup;
  if (si.family == "quadratic") return build_cost_table(CostSpec::quadratic(si.N), sup);
  if (si.family == "plakhov") return build_cost_table(CostSpec::plakhov(), sup);
  if (si.family == "coulomb") return build_cost_table(CostSpec::coulomb(si.N), sup);
  CounterRng rng(si.seed ^ 0x5eedf1e1d);
  std::vector<std::vector<Vec>> fields;
  for (int l = 0; l + 1 < si.N; ++l) {
    std::vector<Vec> f;
    for (int i = 0; i < si.n; ++i) {
      Vec v(si.d);
      for (int k = 0; k < si.d; ++k) v[k] = rng.next_range(-1, 1);
      f.push_back(std::move(v));
    }
    fields.push_back(std::move(f));
  }
  auto fam = std::make_shared<const VectorFieldFamily>(sup, fields, 2.0);
  return build_cost_table(CostSpec::vector_field(fam), sup);
}

VectorFieldFamily psd_family(SupportPtr sup, int N, std::uint64_t seed, double ridge = 0.1) {
  const int d = sup->dim();
  CounterRng rng(seed);
  std::vector<std::vector<Vec>> fields;
  for (int l = 0; l + 1 < N; ++l) {
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = rng.next_range(-0.7, 0.7);
    const Eigen::MatrixXd A = M.transpose() * M + ridge * Eigen::MatrixXd::Identity(d, d);
    std::vector<Vec> f;
    for (int i = 0; i < sup->size(); ++i) f.push_back(A * sup->point(i));
    fields.push_back(std::move(f));
  }
  double bound = 0.0;
  for (const auto& f : fields)
    for (const auto& v : f) bound = std::max(bound, v.norm());
  return VectorFieldFamily(sup, fields, bound + 1e-9);
}

VectorFieldFamily negation_single_field(SupportPtr sup, int N, bool leading_zeros = false) {
  std::vector<std::vector<Vec>> fields(static_cast<std::size_t>(N - 1),
                                       std::vector<Vec>());
  for (std::size_t l = 0; l + 1 < static_cast<std::size_t>(N); ++l)
    for (int i = 0; i < sup->size(); ++i)
      fields[l].push_back(Vec::Zero(sup->dim()));
  const std::size_t active = leading_zeros ? static_cast<std::size_t>(N - 2) : 0;
  fields[active].clear();
  for (int i = 0; i < sup->size(); ++i) fields[active].push_back(-sup->point(i));
  double bound = 0.0;
  for (int i = 0; i < sup->size(); ++i) bound = std::max(bound, sup->point(i).norm());
  return VectorFieldFamily(sup, fields, bound + 1e-9);
}

}  // namespace

TEST_CASE("criterion 1+2: duality chain and symmetrization equivalence") {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict chain, equivalence;
  for (const auto& si : duality_instances()) {
    const CostTable c = instantiate(si);
    const auto mu = DiscreteMeasure::uniform(c.support);
    const DualReport rep = duality_report(c, mu, 1e100);
    chain.also(rep.gap_mk_dk1 <= 1e-7);
    chain.also(rep.gap_mk_dk2 <= 1e-7);
    CHECK(rep.gap_mk_dk1 <= 1e-7);
    CHECK(rep.gap_mk_dk2 <= 1e-7);
    // Criterion 2: orbit LP vs symmetrized-cost LP on the same instance.
    const double mode_gap = std::abs(rep.mk_standard - rep.mk_sym);
    equivalence.also(mode_gap <= 1e-8);
    CHECK(mode_gap <= 1e-8);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  chain.also(secs <= 60.0);
  CHECK(secs <= 60.0);
  announce(1, "duality chain on 20 seeded instances", chain.pass);
  announce(2, "orbit vs symmetrized LP agreement", equivalence.pass);
}

TEST_CASE("criterion 3: quadratic degeneracy") {
  Verdict v;
  for (const auto& si : duality_instances()) {
    if (si.family != "quadratic") continue;
    const CostTable c = instantiate(si);
    const auto mu = DiscreteMeasure::uniform(c.support);
    const auto mk = solve_mk_sym(c, mu, SymMode::Orbit);
    v.also(std::abs(mk.value) <= 1e-9);
    CHECK(std::abs(mk.value) <= 1e-9);
    // Optimal plan is the diagonal pushforward of mu.
    std::vector<int> t;
    for (std::size_t f = 0; f < mk.plan.mass().size(); ++f) {
      mk.plan.mass().unflatten_into(f, t);
      const bool diag = std::all_of(t.begin(), t.end(), [&](int i) { return i == t[0]; });
      if (!diag) {
        v.also(mk.plan.mass()[f] <= 1e-10);
        CHECK(mk.plan.mass()[f] <= 1e-10);
      }
    }
    const auto cyc = solve_mk_cyc(c, mu, CycMethod::Exact);
    v.also(cyc.involution.is_identity());
    v.also(std::abs(cyc.value) <= 1e-9);
    CHECK(cyc.involution.is_identity());
    CHECK(std::abs(cyc.value) <= 1e-9);
  }
  announce(3, "quadratic instances degenerate to the identity", v.pass);
}

TEST_CASE("criterion 4: involution/Hamiltonian duality (magic test)") {
  Verdict v;
  // Forward direction: powers of every enumerated involution pass.
  for (int N = 2; N <= 3; ++N) {
    for (int n = 1; n <= 6; ++n) {
      auto sup = tu::random_cloud(n, 1, 4000 + static_cast<std::uint64_t>(10 * n + N));
      const auto mu = DiscreteMeasure::uniform(sup);
      enumerate_involutions(n, N, [&](const NInvolution& S) {
        std::vector<std::vector<int>> maps;
        for (int k = 1; k < N; ++k) {
          std::vector<int> m(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = S.apply_power(i, k);
          maps.push_back(std::move(m));
        }
        const auto rep = magic_test(maps, mu, 25, 4242);
        v.also(rep.pass);
        if (!rep.pass) CHECK(rep.pass);
      });
    }
  }

  // Converse: 50 seeded corrupted families fail with a proof-family witness.
  int corrupted_checked = 0;
  for (std::uint64_t seed = 1; corrupted_checked < 50; ++seed) {
    CounterRng rng(9000 + seed);
    const int n = rng.next_int(3, 6);
    const int N = rng.next_int(2, 3);
    const auto all = enumerate_involutions(n, N);
    const auto& S = all[static_cast<std::size_t>(rng.next_int(0, static_cast<int>(all.size()) - 1))];
    std::vector<std::vector<int>> maps;
    for (int k = 1; k < N; ++k) {
      std::vector<int> m(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = S.apply_power(i, k);
      maps.push_back(std::move(m));
    }
    // Perturb one map off S^i: either break bijectivity or compose with a
    // transposition; keep only perturbations that break the structural law.
    const int slot = rng.next_int(0, N - 2);
    auto corrupted = maps;
    if (rng.next_int(0, 1) == 0) {
      const int a = rng.next_int(0, n - 1);
      int b = rng.next_int(0, n - 2);
      if (b >= a) ++b;
      corrupted[static_cast<std::size_t>(slot)][static_cast<std::size_t>(a)] =
          corrupted[static_cast<std::size_t>(slot)][static_cast<std::size_t>(b)];
    } else {
      const int a = rng.next_int(0, n - 1);
      int b = rng.next_int(0, n - 2);
      if (b >= a) ++b;
      std::swap(corrupted[static_cast<std::size_t>(slot)][static_cast<std::size_t>(a)],
                corrupted[static_cast<std::size_t>(slot)][static_cast<std::size_t>(b)]);
    }
    auto sup = tu::random_cloud(n, 1, 8800 + seed);
    const auto mu = DiscreteMeasure::uniform(sup);
    // Skip accidental repairs (the perturbed family may be another valid one).
    const auto probe = magic_test(corrupted, mu, 5, 1);
    if (probe.structural_ok) continue;
    ++corrupted_checked;
    const auto rep = magic_test(corrupted, mu, 25, 7 + seed);
    const bool good = !rep.pass && rep.witness.has_value() &&
                      (rep.witness->family == "f-indicator" ||
                       rep.witness->family == "proof-distance") &&
                      std::abs(rep.witness->integral) > 1e-9;
    v.also(good);
    CHECK(good);
  }
  announce(4, "magic test on enumerated and corrupted families", v.pass);
}

TEST_CASE("criterion 5: polarity of jointly monotone families") {
  Verdict v;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const int n = 3 + static_cast<int>(k % 4);
    const int N = 2 + static_cast<int>(k % 2);
    const int d = 1 + static_cast<int>((k / 2) % 2);
    auto sup = tu::random_cloud(n, d, 5000 + k);
    const auto fam = psd_family(sup, N, 6000 + k);
    REQUIRE(check_jointly_n_monotone(fam).ok);
    const auto res = polarity_value(fam, DiscreteMeasure::uniform(sup));
    v.also(std::abs(res.value) <= 1e-9);
    v.also(res.argmin.is_identity());
    CHECK(std::abs(res.value) <= 1e-9);
    CHECK(res.argmin.is_identity());
    if (check_strict_jointly_n_monotone(fam).strict) {
      v.also(res.num_optima == 1);
      CHECK(res.num_optima == 1);
    }
  }
  announce(5, "jointly monotone families are polar to the involutions", v.pass);
}

TEST_CASE("criterion 6: polar decomposition certificates") {
  Verdict v;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const int n = 3 + static_cast<int>(k % 4);
    const int N = 2 + static_cast<int>(k % 2);
    const int d = 1 + static_cast<int>(k % 2);
    auto sup = tu::random_cloud(n, d, 7000 + k);
    CounterRng rng(7100 + k);
    std::vector<std::vector<Vec>> fields;
    for (int l = 0; l + 1 < N; ++l) {
      std::vector<Vec> f;
      for (int i = 0; i < n; ++i) {
        Vec w(d);
        for (int j = 0; j < d; ++j) w[j] = rng.next_range(-1, 1);
        f.push_back(std::move(w));
      }
      fields.push_back(std::move(f));
    }
    const VectorFieldFamily fam(sup, fields, 2.0);
    const auto rep = polar_decompose(fam, DiscreteMeasure::uniform(sup));
    v.also(rep.cyc.value <= rep.duality.mk_sym + 1e-7);
    CHECK(rep.cyc.value <= rep.duality.mk_sym + 1e-7);
    if (std::abs(rep.gap) <= 1e-7) {
      v.also(rep.tail_residual <= 1e-6);
      v.also(rep.head_residual <= 1e-6);
      CHECK(rep.tail_residual <= 1e-6);
      CHECK(rep.head_residual <= 1e-6);
    }
  }
  announce(6, "subgradient certificates on zero-gap decompositions", v.pass);
}

TEST_CASE("criterion 7: regularization audit with grid convergence") {
  Verdict v;
  const struct {
    int d, n, N;
    std::uint64_t seed;
  } cases[5] = {{1, 3, 2, 71}, {1, 3, 3, 72}, {2, 3, 2, 73}, {2, 3, 3, 74}, {1, 2, 2, 75}};
  for (const auto& cs : cases) {
    auto sup = tu::random_cloud(cs.n, cs.d, 7700 + cs.seed);
    const auto H = tu::random_subantisym(sup, cs.N, cs.seed);
    const EvalGrid grid = make_eval_grid(sup, 9);
    const auto audit = audit_pipeline(H, grid);
    v.also(audit.all_pass);
    CHECK(audit.all_pass);
  }
  // Grid convergence on one instance: tau(17) < tau(9), audit passes at both.
  {
    auto sup = tu::random_cloud(3, 1, 7801);
    const auto H = tu::random_subantisym(sup, 3, 81);
    const EvalGrid g9 = make_eval_grid(sup, 9);
    const EvalGrid g17 = make_eval_grid(sup, 17);
    v.also(grid_tolerance(g17) < grid_tolerance(g9));
    CHECK(grid_tolerance(g17) < grid_tolerance(g9));
    const auto a9 = audit_pipeline(H, g9);
    const auto a17 = audit_pipeline(H, g17);
    v.also(a9.all_pass && a17.all_pass);
    CHECK(a9.all_pass);
    CHECK(a17.all_pass);
    std::printf("[ACCEPT]   tau(9) = %.6g (measured residual %.3g), tau(17) = %.6g (measured %.3g)\n",
                a9.tau, a9.measured_subanti, a17.tau, a17.measured_subanti);
  }
  announce(7, "regularization pipeline audit at m=9 plus grid refinement", v.pass);
}

TEST_CASE("criterion 8: SCE co-motion experiment") {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;

  auto sce_support = [](int n) {
    std::vector<Vec> pts;
    for (int k = 0; k < n; ++k) pts.push_back(v1((k + 0.5) / n));
    return make_support(std::move(pts), 1.0);
  };

  for (int n : {4, 6}) {
    auto sup = sce_support(n);
    const auto mu = DiscreteMeasure::uniform(sup);
    const auto c = build_cost_table(CostSpec::coulomb(2), sup);
    const auto sol = solve_mk_cyc(c, mu, CycMethod::Exact);

    // Brute-force oracle: filter all n! permutations by S^2 = I.
    double oracle = -1e300;
    std::vector<int> oracle_perm;
    for (const auto& p : tu::all_permutations(n)) {
      if (!tu::perm_power_is_identity(p, 2)) continue;
      double val = 0.0;
      bool finite = true;
      for (int x = 0; x < n && finite; ++x) {
        if (p[static_cast<std::size_t>(x)] == x) finite = false;
        else val -= mu.weight(x) / std::abs(sup->point(x)[0] -
                                            sup->point(p[static_cast<std::size_t>(x)])[0]);
      }
      if (finite && val > oracle) {
        oracle = val;
        oracle_perm = p;
      }
    }
    v.also(std::abs(sol.value - oracle) <= 1e-12);
    CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-14));
    // Half-shift pairing: atom k with atom k + n/2.
    for (int x = 0; x < n; ++x) {
      v.also(sol.involution.apply(x) == (x + n / 2) % n);
      CHECK(sol.involution.apply(x) == (x + n / 2) % n);
    }
    CHECK(oracle_perm == sol.involution.perm());
  }

  {
    auto sup = sce_support(6);
    const auto mu = DiscreteMeasure::uniform(sup);
    const auto c = build_cost_table(CostSpec::coulomb(3), sup);
    const auto exact = solve_mk_cyc(c, mu, CycMethod::Exact);
    LocalSearchOptions opts;  // 20 restarts default
    const auto local = solve_mk_cyc(c, mu, CycMethod::Local, 12345, std::nullopt, opts);
    v.also(std::abs(exact.value - local.value) <= 1e-12);
    CHECK(exact.value == doctest::Approx(local.value).epsilon(1e-14));
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.also(secs <= 30.0);
  CHECK(secs <= 30.0);
  announce(8, "SCE half-shift pairings and exact/local agreement", v.pass);
}

TEST_CASE("criterion 9: single-field reduction for u(x) = -x") {
  Verdict v;
  struct Case {
    SupportPtr sup;
    int N;
    bool leading_zeros;
  };
  std::vector<Case> cases;
  cases.push_back({make_support_1d({-1.0, 1.0}, 1.0), 2, false});
  cases.push_back({make_support_1d({-1.0, -0.5, 0.5, 1.0}, 1.0), 2, false});
  cases.push_back({make_support({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}, 1.0), 2, false});
  cases.push_back({make_support_1d({-1.0, 1.0}, 1.0), 4, false});
  cases.push_back({make_support_1d({-1.0, 1.0}, 1.0), 4, true});

  for (const auto& cs : cases) {
    const auto fam = negation_single_field(cs.sup, cs.N, cs.leading_zeros);
    const auto rep = polar_decompose(fam, DiscreteMeasure::uniform(cs.sup));
    REQUIRE(rep.single_field.has_value());
    const auto& sf = *rep.single_field;
    v.also(std::abs(rep.gap) <= 1e-7);
    v.also(sf.diag_max_abs == 0.0);  // exact zero on these symmetric supports
    v.also(sf.cycle_max_sum <= sf.tau);
    v.also(sf.head_residual <= 1e-6);
    v.also(sf.tail_residual <= 1e-6);
    CHECK(std::abs(rep.gap) <= 1e-7);
    CHECK(sf.diag_max_abs == 0.0);
    CHECK(sf.cycle_max_sum <= sf.tau);
    CHECK(sf.head_residual <= 1e-6);
    CHECK(sf.tail_residual <= 1e-6);
  }
  announce(9, "two-variable F emission and saddle subdifferential inclusions", v.pass);
}

TEST_CASE("criterion 10: determinism of scenario reports") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "symot_accept_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = R"({
    "name": "accept-det",
    "instance": {"generator": {"type": "random-cloud", "n": 5, "d": 2, "seed": 77}},
    "N": 2,
    "cost": {"family": "vectorfield",
             "fields": [{"type": "random-bounded", "seed": 5, "bound": 1.0}]},
    "tasks": ["duality", "cyc", "decompose", "monotone"],
    "method": {"cyc": "exact", "seed": 3},
    "output_dir": ")" + dir.string() + R"("
  })";
  {
    std::ofstream out(dir / "cfg.json", std::ios::binary);
    out << cfg;
  }
  auto run_once = [&]() {
    const std::string cmd = std::string(SYMOT_BIN) + " run " + (dir / "cfg.json").string() +
                            " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    REQUIRE(WEXITSTATUS(rc) == 0);
    std::ifstream in(dir / "report.json");
    nlohmann::json r = nlohmann::json::parse(in);
    r.erase("timings_ms");
    return r.dump();
  };
  const std::string first = run_once();
  const std::string second = run_once();
  const bool pass = first == second;
  CHECK(pass);
  announce(10, "byte-identical reports modulo timings", pass);
}
