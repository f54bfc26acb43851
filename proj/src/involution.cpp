#include "symot/involution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "symot/rng.hpp"

namespace symot {

namespace {

std::vector<int> divisors_of(int N) {
  std::vector<int> d;
  for (int k = 1; k <= N; ++k)
    if (N % k == 0) d.push_back(k);
  return d;
}

// a(n) = sum_{L | N} C(n-1, L-1) (L-1)! a(n-L), labeled cycle counting.
std::uint64_t count_rec(int n, const std::vector<int>& parts, std::vector<std::uint64_t>& memo,
                        std::uint64_t cap) {
  if (n == 0) return 1;
  if (memo[static_cast<std::size_t>(n)] != UINT64_MAX) return memo[static_cast<std::size_t>(n)];
  long double total = 0;
  for (int L : parts) {
    if (L > n) break;
    long double ways = 1;
    for (int i = 1; i < L; ++i) ways *= static_cast<long double>(n - i);  // C(n-1,L-1)(L-1)!
    total += ways * static_cast<long double>(count_rec(n - L, parts, memo, cap));
    if (total > static_cast<long double>(cap)) {
      memo[static_cast<std::size_t>(n)] = cap + 1;
      return cap + 1;
    }
  }
  memo[static_cast<std::size_t>(n)] = static_cast<std::uint64_t>(total);
  return memo[static_cast<std::size_t>(n)];
}

struct Enumerator {
  int n, N;
  std::vector<int> parts;  // divisors of N, ascending
  const std::function<void(const NInvolution&)>* fn;
  std::vector<int> perm;
  std::vector<bool> used;

  void fill(int remaining) {
    if (remaining == 0) {
      (*fn)(NInvolution(perm, N));
      return;
    }
    int leader = 0;
    while (used[static_cast<std::size_t>(leader)]) ++leader;
    used[static_cast<std::size_t>(leader)] = true;
    for (int L : parts) {
      if (L > remaining) break;
      if (L == 1) {
        perm[static_cast<std::size_t>(leader)] = leader;
        fill(remaining - 1);
      } else {
        std::vector<int> free_elems;
        for (int i = leader + 1; i < n; ++i)
          if (!used[static_cast<std::size_t>(i)]) free_elems.push_back(i);
        choose_companions(leader, L, free_elems, 0, {}, remaining);
      }
    }
    used[static_cast<std::size_t>(leader)] = false;
  }

  // Lexicographic (L-1)-subsets of free_elems, then all arrangements.
  void choose_companions(int leader, int L, const std::vector<int>& free_elems, std::size_t start,
                         std::vector<int> chosen, int remaining) {
    if (static_cast<int>(chosen.size()) == L - 1) {
      std::sort(chosen.begin(), chosen.end());
      do {
        int prev = leader;
        for (int e : chosen) {
          perm[static_cast<std::size_t>(prev)] = e;
          used[static_cast<std::size_t>(e)] = true;
          prev = e;
        }
        perm[static_cast<std::size_t>(prev)] = leader;
        fill(remaining - L);
        for (int e : chosen) used[static_cast<std::size_t>(e)] = false;
      } while (std::next_permutation(chosen.begin(), chosen.end()));
      return;
    }
    for (std::size_t i = start; i < free_elems.size(); ++i) {
      chosen.push_back(free_elems[i]);
      choose_companions(leader, L, free_elems, i + 1, chosen, remaining);
      chosen.pop_back();
    }
  }
};

}  // namespace

std::uint64_t count_involutions(int n, int N, std::uint64_t cap) {
  if (n < 1 || N < 1) throw std::invalid_argument("count_involutions: n, N must be positive");
  std::vector<std::uint64_t> memo(static_cast<std::size_t>(n) + 1, UINT64_MAX);
  return count_rec(n, divisors_of(N), memo, cap);
}

void enumerate_involutions(int n, int N, const std::function<void(const NInvolution&)>& fn,
                           std::uint64_t guard) {
  if (count_involutions(n, N, guard) > guard)
    throw std::length_error("enumerate_involutions: enumeration guard exceeded");
  Enumerator e;
  e.n = n;
  e.N = N;
  e.parts = divisors_of(N);
  e.fn = &fn;
  e.perm.assign(static_cast<std::size_t>(n), -1);
  e.used.assign(static_cast<std::size_t>(n), false);
  e.fill(n);
}

std::vector<NInvolution> enumerate_involutions(int n, int N, std::uint64_t guard) {
  std::vector<NInvolution> out;
  enumerate_involutions(
      n, N, [&](const NInvolution& s) { out.push_back(s); }, guard);
  return out;
}

double involution_value(const CostTable& c, const DiscreteMeasure& mu, const NInvolution& S) {
  const int n = c.n();
  const int N = c.order();
  double v = 0.0;
  std::vector<int> t(static_cast<std::size_t>(N));
  for (int x = 0; x < n; ++x) {
    int j = x;
    for (int k = 0; k < N; ++k) {
      t[static_cast<std::size_t>(k)] = j;
      j = S.apply(j);
    }
    const double cv = c.values.at(t);
    if (is_neg_inf(cv)) return kNegInf;
    v += mu.weight(x) * cv;
  }
  return v;
}

Coupling involution_plan(const NInvolution& S, const DiscreteMeasure& mu) {
  const int n = mu.support().size();
  const int N = S.order_bound();
  NdTable mass = NdTable::cube(n, N);
  std::vector<int> t(static_cast<std::size_t>(N));
  for (int x = 0; x < n; ++x) {
    int j = x;
    for (int k = 0; k < N; ++k) {
      t[static_cast<std::size_t>(k)] = j;
      j = S.apply(j);
    }
    mass.at(t) += mu.weight(x);
  }
  return Coupling(std::move(mass), mu.support_ptr());
}

namespace {

void require_uniform(const DiscreteMeasure& mu, const char* who) {
  if (!mu.is_uniform())
    throw std::invalid_argument(std::string(who) +
                                ": involution search requires uniform atom weights");
}

// Seeded random involution: random cycle type and filling.
NInvolution random_involution(int n, int N, CounterRng& rng) {
  const auto parts = divisors_of(N);
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  std::vector<int> free_elems(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) free_elems[static_cast<std::size_t>(i)] = i;
  while (!free_elems.empty()) {
    const int leader = free_elems.front();
    std::vector<int> feasible;
    for (int L : parts)
      if (L <= static_cast<int>(free_elems.size())) feasible.push_back(L);
    const int L = feasible[static_cast<std::size_t>(
        rng.next_int(0, static_cast<int>(feasible.size()) - 1))];
    std::vector<int> cyc{leader};
    free_elems.erase(free_elems.begin());
    for (int k = 1; k < L; ++k) {
      const int pick = rng.next_int(0, static_cast<int>(free_elems.size()) - 1);
      cyc.push_back(free_elems[static_cast<std::size_t>(pick)]);
      free_elems.erase(free_elems.begin() + pick);
    }
    for (std::size_t k = 0; k < cyc.size(); ++k)
      perm[static_cast<std::size_t>(cyc[k])] = cyc[(k + 1) % cyc.size()];
  }
  return NInvolution(std::move(perm), N);
}

// Neighborhood moves: swap two images (validated), conjugate by a
// transposition (swaps the roles of two atoms; always type-preserving, which
// keeps the search ergodic within a cycle type even when every merge/split is
// forbidden, e.g. N = 3), rotate a cycle, merge two cycles, split a cycle;
// merges/splits keep every length dividing N.
std::optional<NInvolution> propose_move(const NInvolution& S, int N, CounterRng& rng) {
  const int n = S.size();
  const int kind = rng.next_int(0, 4);
  std::vector<int> perm = S.perm();
  if (kind == 0) {
    if (n < 2) return std::nullopt;
    const int a = rng.next_int(0, n - 1);
    int b = rng.next_int(0, n - 2);
    if (b >= a) ++b;
    std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    if (!NInvolution::is_valid(perm, N)) return std::nullopt;
    return NInvolution(std::move(perm), N);
  }
  if (kind == 4) {
    if (n < 2) return std::nullopt;
    const int a = rng.next_int(0, n - 1);
    int b = rng.next_int(0, n - 2);
    if (b >= a) ++b;
    for (int i = 0; i < n; ++i) {
      int v = S.apply(i == a ? b : (i == b ? a : i));
      if (v == a) v = b;
      else if (v == b) v = a;
      perm[static_cast<std::size_t>(i)] = v;
    }
    return NInvolution(std::move(perm), N);
  }
  auto cycles = S.cycles();
  if (kind == 1) {  // rotate: reverse-order a cycle of length >= 3
    std::vector<std::size_t> big;
    for (std::size_t i = 0; i < cycles.size(); ++i)
      if (cycles[i].size() >= 3) big.push_back(i);
    if (big.empty()) return std::nullopt;
    auto& cyc = cycles[big[static_cast<std::size_t>(
        rng.next_int(0, static_cast<int>(big.size()) - 1))]];
    std::vector<int> rot(cyc.begin() + 1, cyc.end());
    const int shift = rng.next_int(1, static_cast<int>(rot.size()) - 1) ;
    std::rotate(rot.begin(), rot.begin() + shift, rot.end());
    int prev = cyc[0];
    for (int e : rot) {
      perm[static_cast<std::size_t>(prev)] = e;
      prev = e;
    }
    perm[static_cast<std::size_t>(prev)] = cyc[0];
    if (!NInvolution::is_valid(perm, N)) return std::nullopt;
    return NInvolution(std::move(perm), N);
  }
  if (kind == 2) {  // merge
    if (cycles.size() < 2) return std::nullopt;
    const int a = rng.next_int(0, static_cast<int>(cycles.size()) - 1);
    int b = rng.next_int(0, static_cast<int>(cycles.size()) - 2);
    if (b >= a) ++b;
    const int merged = static_cast<int>(cycles[static_cast<std::size_t>(a)].size() +
                                        cycles[static_cast<std::size_t>(b)].size());
    if (N % merged != 0) return std::nullopt;
    std::vector<int> cyc = cycles[static_cast<std::size_t>(a)];
    cyc.insert(cyc.end(), cycles[static_cast<std::size_t>(b)].begin(),
               cycles[static_cast<std::size_t>(b)].end());
    for (std::size_t k = 0; k < cyc.size(); ++k)
      perm[static_cast<std::size_t>(cyc[k])] = cyc[(k + 1) % cyc.size()];
    return NInvolution(std::move(perm), N);
  }
  // split
  std::vector<std::size_t> splittable;
  for (std::size_t i = 0; i < cycles.size(); ++i)
    if (cycles[i].size() >= 2) splittable.push_back(i);
  if (splittable.empty()) return std::nullopt;
  auto& cyc = cycles[splittable[static_cast<std::size_t>(
      rng.next_int(0, static_cast<int>(splittable.size()) - 1))]];
  const int L = static_cast<int>(cyc.size());
  const int p = rng.next_int(1, L - 1);
  if (N % p != 0 || N % (L - p) != 0) return std::nullopt;
  for (int k = 0; k < p; ++k)
    perm[static_cast<std::size_t>(cyc[static_cast<std::size_t>(k)])] =
        cyc[static_cast<std::size_t>((k + 1) % p)];
  for (int k = p; k < L; ++k)
    perm[static_cast<std::size_t>(cyc[static_cast<std::size_t>(k)])] =
        cyc[static_cast<std::size_t>(p + (k - p + 1) % (L - p))];
  return NInvolution(std::move(perm), N);
}

}  // namespace

CycSolution solve_mk_cyc(const CostTable& c, const DiscreteMeasure& mu, CycMethod method,
                         std::uint64_t seed, std::optional<double> mk_sym,
                         const LocalSearchOptions& opts) {
  require_uniform(mu, "solve_mk_cyc");
  const int n = c.n();
  const int N = c.order();

  std::optional<NInvolution> best;
  double best_value = -std::numeric_limits<double>::infinity();

  if (method == CycMethod::Exact) {
    enumerate_involutions(n, N, [&](const NInvolution& S) {
      const double v = involution_value(c, mu, S);
      if (is_neg_inf(v)) return;
      if (v > best_value ||
          (v == best_value && best.has_value() && S.perm() < best->perm())) {
        best_value = v;
        best = S;
      }
    });
  } else {
    struct RestartResult {
      std::optional<NInvolution> s;
      double value = -std::numeric_limits<double>::infinity();
    };
    std::vector<RestartResult> results(static_cast<std::size_t>(opts.restarts));
    auto run_restart = [&](int r) {
      CounterRng rng(seed, static_cast<std::uint64_t>(r));
      NInvolution cur = random_involution(n, N, rng);
      double cur_v = involution_value(c, mu, cur);
      for (int step = 0; step < opts.moves_per_restart; ++step) {
        auto cand = propose_move(cur, N, rng);
        if (!cand) continue;
        const double v = involution_value(c, mu, *cand);
        if (is_neg_inf(cur_v) ? !is_neg_inf(v) : v > cur_v) {
          cur = *cand;
          cur_v = v;
        }
      }
      if (!is_neg_inf(cur_v)) results[static_cast<std::size_t>(r)] = {cur, cur_v};
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
      for (int r = 0; r < opts.restarts; ++r) run_restart(r);
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
          for (int r = next.fetch_add(1); r < opts.restarts; r = next.fetch_add(1)) run_restart(r);
        });
      for (auto& th : pool) th.join();
    }
    // Deterministic reduction: strictly better value wins, ties to the lowest
    // restart index.
    for (const auto& rr : results) {
      if (!rr.s) continue;
      if (rr.value > best_value) {
        best_value = rr.value;
        best = rr.s;
      }
    }
  }

  if (!best) throw std::runtime_error("solve_mk_cyc: no finite-cost involution");
  std::optional<double> gap;
  if (mk_sym) gap = *mk_sym - best_value;
  return CycSolution{*best, best_value, method, gap};
}

namespace {

double distance(const SupportSet& sup, int i, int j) {
  return (sup.point(i) - sup.point(j)).norm();
}

// Mean of H(x, S_1 x, ..., S_{N-1} x) for the |.|-distance proof Hamiltonian
// H_i(x_1..x_N) = |x_i - S1^i x_N| - |S1^i x_1 - x_{i+1}| - |x_{i+1} - S1^i x_1|
//               + |S1^i x_2 - x_{i+2}|  (1-based, cyclic indices).
double proof_family_integral(const std::vector<std::vector<int>>& maps,
                             const DiscreteMeasure& mu, int i_param) {
  const auto& sup = mu.support();
  const int n = sup.size();
  const int N = static_cast<int>(maps.size()) + 1;
  const auto& s1 = maps[0];
  auto s1_pow = [&](int x, int k) {
    int j = x;
    for (int s = 0; s < k; ++s) j = s1[static_cast<std::size_t>(j)];
    return j;
  };
  auto tuple_at = [&](int x, int slot1based) {  // x_k of the evaluated tuple
    int k = ((slot1based - 1) % N + N) % N;     // 0 -> x, k -> S_k x
    return k == 0 ? x : maps[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)];
  };
  double acc = 0.0;
  for (int x = 0; x < n; ++x) {
    const int xi = tuple_at(x, i_param);
    const int x1 = tuple_at(x, 1);
    const int x2 = tuple_at(x, 2);
    const int xn = tuple_at(x, N);
    const int xi1 = tuple_at(x, i_param + 1);
    const int xi2 = tuple_at(x, i_param + 2);
    const double h = distance(sup, xi, s1_pow(xn, i_param)) -
                     distance(sup, s1_pow(x1, i_param), xi1) -
                     distance(sup, xi1, s1_pow(x1, i_param)) +
                     distance(sup, s1_pow(x2, i_param), xi2);
    acc += mu.weight(x) * h;
  }
  return acc;
}

}  // namespace

MagicReport magic_test(const std::vector<std::vector<int>>& maps, const DiscreteMeasure& mu,
                       int trials, std::uint64_t seed) {
  require_uniform(mu, "magic_test");
  const int n = mu.support().size();
  const int N = static_cast<int>(maps.size()) + 1;
  if (N < 2) throw std::invalid_argument("magic_test: need at least one map");
  for (const auto& m : maps) {
    if (static_cast<int>(m.size()) != n)
      throw std::invalid_argument("magic_test: map not defined on all atoms");
    for (int v : m)
      if (v < 0 || v >= n) throw std::invalid_argument("magic_test: map image out of range");
  }

  MagicReport rep;
  const auto& s1 = maps[0];

  // Structural characterization: the maps are the powers of one bijection
  // whose order divides N.
  rep.structural_ok = true;
  {
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    for (int v : s1) hits[static_cast<std::size_t>(v)]++;
    for (int i = 0; i < n && rep.structural_ok; ++i)
      if (hits[static_cast<std::size_t>(i)] != 1) {
        rep.structural_ok = false;
        rep.structural_reason = "S_1 is not a bijection";
      }
    for (int k = 2; k < N && rep.structural_ok; ++k)
      for (int x = 0; x < n; ++x) {
        int j = x;
        for (int s = 0; s < k; ++s) j = s1[static_cast<std::size_t>(j)];
        if (j != maps[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)]) {
          rep.structural_ok = false;
          rep.structural_reason = "S_" + std::to_string(k) + " != S_1^" + std::to_string(k);
          break;
        }
      }
    for (int x = 0; x < n && rep.structural_ok; ++x) {
      int j = x;
      for (int s = 0; s < N; ++s) j = s1[static_cast<std::size_t>(j)];
      if (j != x) {
        rep.structural_ok = false;
        rep.structural_reason = "S_1^N != identity";
      }
    }
  }

  // Randomized direction: antisymmetric Hamiltonians must integrate to zero.
  const double tol = 1e-9;
  CounterRng rng(seed);
  auto tuple_index = [&](int x, int k) {  // k-th entry of (x, S_1 x, ..., S_{N-1} x)
    return k == 0 ? x : maps[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)];
  };
  std::optional<MagicWitness> random_witness;
  for (int trial = 0; trial < trials; ++trial) {
    double integral = 0.0;
    if (trial % 2 == 0) {
      // f-difference family H = f(x_1) - f(x_i).
      Eigen::VectorXd f(n);
      for (int i = 0; i < n; ++i) f[i] = rng.next_range(-1.0, 1.0);
      const int slot = rng.next_int(1, N - 1);
      for (int x = 0; x < n; ++x)
        integral += mu.weight(x) * (f[tuple_index(x, 0)] - f[tuple_index(x, slot)]);
    } else {
      // Random table, antisymmetrized by subtracting its orbit average.
      NdTable T = NdTable::cube(n, N);
      for (auto& v : T.data()) v = rng.next_range(-1.0, 1.0);
      std::vector<int> t(static_cast<std::size_t>(N)), r;
      for (int x = 0; x < n; ++x) {
        for (int k = 0; k < N; ++k) t[static_cast<std::size_t>(k)] = tuple_index(x, k);
        double orbit_avg = 0.0;
        r = t;
        for (int k = 0; k < N; ++k) {
          orbit_avg += T.at(r);
          r.push_back(r.front());
          r.erase(r.begin());
        }
        integral += mu.weight(x) * (T.at(t) - orbit_avg / static_cast<double>(N));
      }
    }
    rep.max_random_residual = std::max(rep.max_random_residual, std::abs(integral));
    if (std::abs(integral) > tol && !random_witness)
      random_witness = MagicWitness{"random-antisym", trial, -1, integral};
  }

  rep.pass = rep.structural_ok && rep.max_random_residual <= tol;
  if (rep.pass) return rep;

  // Witness search, proof families first.
  for (int slot = 1; slot < N && !rep.witness; ++slot) {
    for (int atom = 0; atom < n; ++atom) {
      double integral = 0.0;  // f = indicator of `atom`
      for (int x = 0; x < n; ++x)
        integral += mu.weight(x) * ((tuple_index(x, 0) == atom ? 1.0 : 0.0) -
                                    (tuple_index(x, slot) == atom ? 1.0 : 0.0));
      if (std::abs(integral) > tol) {
        rep.witness = MagicWitness{"f-indicator", slot, atom, integral};
        break;
      }
    }
  }
  for (int i = 1; i <= N && !rep.witness; ++i) {
    const double integral = proof_family_integral(maps, mu, i);
    if (std::abs(integral) > tol) rep.witness = MagicWitness{"proof-distance", i, -1, integral};
  }
  if (!rep.witness && random_witness) rep.witness = random_witness;
  return rep;
}

ArgmaxExtraction extract_argmax_maps(const HamiltonianTable& H, const CostTable& c, double tol) {
  const int n = c.n();
  const int N = c.order();
  if (H.values.dims() != c.values.dims())
    throw std::invalid_argument("extract_argmax_maps: shape mismatch");

  ArgmaxExtraction out;
  out.maps.assign(static_cast<std::size_t>(N - 1), std::vector<int>(static_cast<std::size_t>(n), -1));
  out.unique.assign(static_cast<std::size_t>(n), false);

  const std::vector<int> tail_dims(static_cast<std::size_t>(N - 1), n);
  std::vector<int> full(static_cast<std::size_t>(N));
  for (int x = 0; x < n; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    std::vector<int> best_t;
    full[0] = x;
    for_each_tuple(tail_dims, [&](const std::vector<int>& ys) {
      for (int i = 0; i + 1 < N; ++i) full[static_cast<std::size_t>(i) + 1] = ys[static_cast<std::size_t>(i)];
      const double cv = c.values.at(full);
      if (is_neg_inf(cv)) return;
      const double v = cv - H.values.at(full);
      if (v > best) {
        second = best;
        best = v;
        best_t = ys;
      } else if (v > second) {
        second = v;
      }
    });
    if (best_t.empty())
      throw std::runtime_error("extract_argmax_maps: all tuples NEG_INF at atom");
    for (int l = 0; l + 1 < N; ++l)
      out.maps[static_cast<std::size_t>(l)][static_cast<std::size_t>(x)] =
          best_t[static_cast<std::size_t>(l)];
    out.unique[static_cast<std::size_t>(x)] = second < best - tol;
  }
  out.all_unique =
      std::all_of(out.unique.begin(), out.unique.end(), [](bool b) { return b; });
  if (out.all_unique) {
    const DiscreteMeasure uni = DiscreteMeasure::uniform(c.support);
    out.verdict = magic_test(out.maps, uni, 50, 7);
  }
  return out;
}

}  // namespace symot
