#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "symot/core.hpp"

namespace symot {

// Number of permutations of {0..n-1} whose cycle lengths divide N,
// saturating at `cap`.
std::uint64_t count_involutions(int n, int N, std::uint64_t cap = 20'000'000);

// Deterministic stream of all such permutations: partitions of n into parts
// dividing N, then canonical fillings (smallest free element leads each cycle,
// companions and arrangements in lexicographic order). Throws when the count
// exceeds `guard`.
void enumerate_involutions(int n, int N, const std::function<void(const NInvolution&)>& fn,
                           std::uint64_t guard = 10'000'000);
std::vector<NInvolution> enumerate_involutions(int n, int N, std::uint64_t guard = 10'000'000);

enum class CycMethod { Exact, Local };

struct CycSolution {
  NInvolution involution;
  double value = 0.0;
  CycMethod method = CycMethod::Exact;
  std::optional<double> gap_vs_sym;  // mk_sym - value when mk_sym was supplied
};

struct LocalSearchOptions {
  int restarts = 20;
  int moves_per_restart = 1000;
  int threads = 1;
};

// MK_cyc(c, mu) = max over N-involutions S of sum_x mu(x) c(x, Sx, ..., S^{N-1}x).
// Exact mode enumerates with a deterministic lexicographic tie-break; local
// mode is seeded multi-restart hill climbing (never better than exact).
CycSolution solve_mk_cyc(const CostTable& c, const DiscreteMeasure& mu, CycMethod method,
                         std::uint64_t seed = 0, std::optional<double> mk_sym = std::nullopt,
                         const LocalSearchOptions& opts = {});

// Pushforward of mu under x -> (x, S x, ..., S^{N-1} x); sigma-invariant with
// first marginal mu by construction.
Coupling involution_plan(const NInvolution& S, const DiscreteMeasure& mu);

double involution_value(const CostTable& c, const DiscreteMeasure& mu, const NInvolution& S);

struct MagicWitness {
  std::string family;  // "f-indicator", "proof-distance", "random-antisym"
  int index = 0;       // slot or i parameter
  int atom = -1;       // for f-indicator witnesses
  double integral = 0.0;
};

struct MagicReport {
  bool pass = false;
  bool structural_ok = false;
  std::string structural_reason;
  double max_random_residual = 0.0;
  std::optional<MagicWitness> witness;
};

// Involution/Hamiltonian duality test. PASS iff the mean of H(x, S_1 x, ..., S_{N-1} x)
// vanishes for `trials` random N-antisymmetric Hamiltonians AND the structural
// characterization holds (S_1 bijective, S_i = S_1^i, S_1^N = id). On FAIL a
// witness Hamiltonian with nonzero mean is produced from the proof families
// (indicator differences f(x_1) - f(x_i), then the |.|-distance family H_i).
MagicReport magic_test(const std::vector<std::vector<int>>& maps, const DiscreteMeasure& mu,
                       int trials, std::uint64_t seed);

struct ArgmaxExtraction {
  std::vector<std::vector<int>> maps;  // maps[l][atom], l = 0..N-2
  std::vector<bool> unique;            // per atom
  bool all_unique = false;
  std::optional<MagicReport> verdict;  // present when all flags are true
};

// Argmax extraction: per-atom argmax of c(x,.) - H(x,.) with
// lexicographic tie-break; when every argmax is unique the candidate maps are
// fed to magic_test.
ArgmaxExtraction extract_argmax_maps(const HamiltonianTable& H, const CostTable& c,
                                     double tol = 1e-9);

}  // namespace symot
