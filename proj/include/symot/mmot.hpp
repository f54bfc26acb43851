#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "symot/core.hpp"
#include "symot/symmetrize.hpp"

namespace symot {

enum class SymMode { Orbit, Symmetrized };

struct MkSymResult {
  double value = 0.0;
  Coupling plan;
  Potential potential;  // DK^1-feasible u for c~ recovered from the LP duals
};

// MK_sym(c, mu): maximize integral of c over sigma-invariant couplings with
// first marginal mu.
//
// Orbit mode solves over one variable per sigma-orbit (canonical representative
// = lexicographically smallest rotation), which enforces invariance exactly and
// shrinks the LP about N-fold. Symmetrized mode solves the standard
// multi-marginal LP for c~ with all marginals mu and symmetrizes the plan.
MkSymResult solve_mk_sym(const CostTable& c, const DiscreteMeasure& mu, SymMode mode);

struct StandardMmResult {
  double value = 0.0;
  Coupling plan;
  std::vector<Potential> duals;  // one per marginal slot, mean-balanced
};

// MK(c; mu_1,...,mu_N), exact LP with dual potentials from the simplex
// multipliers. Feasibility sum_j u_j(x_{t_j}) >= c[t] - 1e-9 holds on every
// finite-cost tuple, with complementary slackness on the optimal plan.
StandardMmResult solve_standard_mm(const CostTable& c, const std::vector<DiscreteMeasure>& marginals);

// Damped fixed-point refinement v <- (vbar + (N-1) v)/N of a DK^1-feasible
// potential for a symmetric cost, down to the self-consistency
// u0(x) = max { c~(x,y...) - sum u0(y_i) }. Monotone: output <= input.
Potential refine_potential(const Potential& u, const CostTable& c_sym,
                           double step_tol = 1e-10, int max_iters = 10000);

// ell_H^c(x) = max over (N-1)-tuples of c(x, y...) - H(x, y...), NEG_INF
// tuples excluded.
Potential c_legendre(const HamiltonianTable& H, const CostTable& c);

struct DualReport {
  double mk_sym = 0.0;
  double dk1 = 0.0;
  double dk2 = 0.0;
  double mk_standard = 0.0;  // MK(c~; mu,...,mu), the symmetrized-mode cross-check
  Coupling plan;
  Potential potential;       // fixed-point u0
  HamiltonianTable hamiltonian;  // H_inf
  double gap_mk_dk1 = 0.0, gap_mk_dk2 = 0.0, gap_dk1_dk2 = 0.0;
};

// The three-way duality certificate on one instance: MK_sym, DK^1 and DK^2
// computed along independent routes, asserted to agree within `tol`.
DualReport duality_report(const CostTable& c, const DiscreteMeasure& mu, double tol = 1e-7);

struct EntropicResult {
  double value = 0.0;
  Coupling plan;
  Potential potential;
  int iterations = 0;
};

// Smoothed single-potential fixed point in the log domain; cross-check only.
EntropicResult solve_entropic(const CostTable& c_sym, const DiscreteMeasure& mu, double epsilon,
                              double step_tol = 1e-9, int max_iters = 100000);

}  // namespace symot
