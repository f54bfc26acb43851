#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "symot/core.hpp"
#include "symot/involution.hpp"
#include "symot/mmot.hpp"
#include "symot/regularize.hpp"

namespace symot {

struct CycleCheck {
  bool ok = false;
  double min_sum = 0.0;
  std::vector<int> worst_cycle;  // atom indices
};

// Exhaustive N-cyclic monotonicity of a single field over all atom cycles of
// length N (repetition allowed, x_{N+1} = x_1).
CycleCheck check_n_cyclically_monotone(const std::vector<Vec>& field, const SupportSet& support,
                                       int N, std::size_t guard = 10'000'000);

// Definition 1.4 over atom cycles x_1..x_N extended by x_{N+l} = x_l.
CycleCheck check_jointly_n_monotone(const VectorFieldFamily& family,
                                    std::size_t guard = 10'000'000);

struct StrictCheck {
  bool strict = false;
  double min_offdiag_sum = 0.0;  // over cycles with x_1 != x_2
  std::vector<int> worst_cycle;
};

// Definition 5.4: cycle sums strictly positive whenever x_1 != x_2.
StrictCheck check_strict_jointly_n_monotone(const VectorFieldFamily& family,
                                            std::size_t guard = 10'000'000);

struct PolarityResult {
  double value = 0.0;
  NInvolution argmin;
  int num_optima = 0;  // involutions within 1e-9 of the minimum
};

// Polarity value: min over N-involutions of integral sum_l <u_l(x), x - S^l x>;
// zero exactly on jointly N-monotone families.
PolarityResult polarity_value(const VectorFieldFamily& family, const DiscreteMeasure& mu,
                              std::uint64_t guard = 10'000'000);

struct MonotoneFlags {
  bool jointly = false;
  bool strictly = false;
  bool each_field_n_monotone = false;
};

struct SingleFieldCertificate {
  Eigen::MatrixXd F;          // two-variable emission from regularize_h0
  double diag_max_abs = 0.0;  // max |F(x,x)|
  double cycle_max_sum = 0.0; // max cyclic sum over support N-cycles
  double head_residual = 0.0; // -u(Sx) in the first slot of dF(x, Sx)
  double tail_residual = 0.0; // u(x) in the second slot
  double tau = 0.0;
};

struct CertificateReport {
  DualReport duality;
  CycSolution cyc;
  double gap = 0.0;
  double tail_residual = 0.0;  // slots 2..N subgradient inequality (inter1)
  double head_residual = 0.0;  // slot-1 superdifferential along the orbit
  bool residuals_asserted = false;  // true when gap <= 1e-7
  bool lower_bound_only = false;    // local search used for MK_cyc
  MonotoneFlags flags;
  std::optional<SingleFieldCertificate> single_field;
};

struct PolarDecomposeOptions {
  CycMethod method = CycMethod::Exact;
  std::uint64_t seed = 0;
  LocalSearchOptions local;
  int grid_m = 9;  // for the single-field F emission
  double gap_tol = 1e-7;
  double residual_tol = 1e-6;
};

// Polar-decomposition pipeline: vector-field cost, duality report, involution
// search, then the discrete subgradient certificates. Residuals are asserted
// only on zero-gap instances; positive-gap reports are descriptive (mu is
// atomic, so relaxation/Monge equality is measured, never assumed).
CertificateReport polar_decompose(const VectorFieldFamily& family, const DiscreteMeasure& mu,
                                  const PolarDecomposeOptions& opts = {});

}  // namespace symot
