#pragma once

#include <Eigen/Dense>
#include <vector>

#include "symot/core.hpp"

namespace symot {

// Orbit-average c~(x) = (1/N) sum_i c(sigma^i x). One value is computed per
// sigma-orbit and written to every member, so c~ o sigma = c~ holds exactly.
// Any NEG_INF member poisons its whole orbit.
CostTable symmetrize_cost(const CostTable& c);

// pi~ = (1/N) sum_i sigma^i # pi; exact sigma-invariance by orbit averaging.
Coupling symmetrize_plan(const Coupling& plan);

struct AntisymReport {
  bool ok = false;
  double max_residual = 0.0;     // max_t |sum_i H(sigma^i t)|
  std::vector<int> worst_tuple;
};

struct SubantisymReport {
  bool ok = false;
  double max_sum = 0.0;          // max_t sum_i H(sigma^i t), positive part is the violation
  double max_diag_abs = 0.0;     // max_x |H(x,...,x)|
  std::vector<int> worst_tuple;
};

// H in H_N: sum of H over each sigma-orbit vanishes.
AntisymReport check_antisymmetric(const NdTable& H, double tol = 1e-10);
inline AntisymReport check_antisymmetric(const HamiltonianTable& H, double tol = 1e-10) {
  return check_antisymmetric(H.values, tol);
}

// H in H_N^-: orbit sums <= 0 and H vanishes on the diagonal.
SubantisymReport check_subantisymmetric(const NdTable& H, double tol = 1e-10);
inline SubantisymReport check_subantisymmetric(const HamiltonianTable& H, double tol = 1e-10) {
  return check_subantisymmetric(H.values, tol);
}

// H_inf = -c~ + c + sum_{i>=2} u0(x_i) - (N-1) u0(x_1).
// On tuples where c is NEG_INF (excluded from every transform and solver) only
// the potential part is kept, which preserves exact antisymmetry.
// When u0 is the fixed point of the c~-transform, ell^c_{H_inf} = N u0.
HamiltonianTable hamiltonian_from_potential(const Potential& u0, const CostTable& c);

// Pairwise-to-N lift H = ((N-1) F(x1,x2) - sum_{i=2}^{N-1} F(x_i,x_{i+1})) / N.
// Orbit sums of H equal (1/N) sum_cyclic F, so H is antisymmetric exactly when
// the cyclic sums of F vanish (e.g. telescoping F), and sub-antisymmetric
// whenever F is N-cyclically sub-antisymmetric; then also H >= F entrywise.
HamiltonianTable hamiltonian_from_pairwise(const Eigen::MatrixXd& F, int N, SupportPtr support);

}  // namespace symot
