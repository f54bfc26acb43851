#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "symot/core.hpp"
#include "symot/symmetrize.hpp"

namespace symot {

// Support samples of Omega plus a uniform grid sampling of the enclosing ball
// B_R (m nodes per dimension, m odd so the origin is a node; d <= 2).
// Every sup over B_R below is taken over this grid, so each continuum
// inequality is checked at a stated discretization tolerance tau(m) rather
// than pretended exact.
struct EvalGrid {
  SupportPtr support;
  std::vector<Vec> ball;
  double radius = 0.0;
  int m = 0;
  std::vector<std::array<int, 3>> ball_triples;  // collinear (lo, mid, hi) node ids
  std::vector<std::array<int, 2>> ball_adjacent;  // neighboring node pairs

  int dim() const { return support->dim(); }
  int n() const { return support->size(); }
  int nb() const { return static_cast<int>(ball.size()); }
};

EvalGrid make_eval_grid(SupportPtr support, int m = 9);

// tau(m) = C R / m. The coefficient was calibrated on seeded desk-scale
// instances; audits additionally report the measured residuals and the
// empirical coefficient they imply.
inline constexpr double kTauCoeff = 10.0;
double grid_tolerance(const EvalGrid& grid, double coeff = kTauCoeff);

enum class SlotDomain { Support, Ball, Combined };

// Tabulated function over grid index tuples; slot i ranges over the domain
// named in slots[i]. Combined indexes support atoms first, then ball nodes.
struct GridFunction {
  std::vector<SlotDomain> slots;
  NdTable values;
};

int domain_size(const EvalGrid& grid, SlotDomain d);
const Vec& grid_point(const EvalGrid& grid, SlotDomain d, int idx);

GridFunction to_grid_function(const HamiltonianTable& H);

// L_H(x, p_1..p_{N-1}) = max_{y in support^{N-1}} sum <p_i, y_i> - H(x, y).
// Slots: (Support, Ball^{N-1}).
GridFunction legendre_LH(const GridFunction& H, const EvalGrid& grid);

// (Omega x B_R)-restricted transform; slots (Ball^{N-1}, Support).
GridFunction restricted_star(const GridFunction& L, const EvalGrid& grid);

// L**; tabulated over (Combined, Ball^{N-1}) and evaluable at arbitrary first
// arguments through the kept inner factor T(p, q) = max_{x in ball^{N-1}}
// (sum <p_i, x_i> - L*(x, q)).
struct DoubleStar {
  GridFunction table;
  Eigen::MatrixXd T;  // ball-tuple x support-atom
  std::vector<Vec> support_points;
  double eval(const Vec& x, std::size_t ball_tuple_flat) const;
};

DoubleStar restricted_double_star(const GridFunction& Lstar, const EvalGrid& grid);

// B_R-Hamiltonian H_L(x, y) = max_{p in ball^{N-1}} sum <p_i, y_i> - L(x, p).
// Input slots (D, Ball^{N-1}); output slots (D, Support^{N-1}).
GridFunction ball_hamiltonian(const GridFunction& L, const EvalGrid& grid);

// The full concave-convexification pipeline for one H in H_N^-.
struct RegPipeline {
  EvalGrid grid;
  GridFunction H;        // input, support^N
  GridFunction L;        // (S, B^{N-1})
  GridFunction Lstar;    // (B^{N-1}, S)
  DoubleStar Lss;        // (C, B^{N-1})
  GridFunction H1;       // (C, S^{N-1})
  NdTable H1_support;    // support^N restriction
  NdTable H2_support;    // support^N
  double tau = 0.0;
  SubantisymReport h1_subanti;  // measured on support tuples

  // H^1_reg at arbitrary points (sup over the ball grid).
  double h1_eval(const Vec& x, const std::vector<Vec>& ys) const;
};

RegPipeline run_reg_pipeline(const HamiltonianTable& H, const EvalGrid& grid);

// H^1_reg = H_{L**_H}; returns the pipeline so the audit can reuse the
// intermediate transforms.
RegPipeline regularize_h1(const HamiltonianTable& H, const EvalGrid& grid);

// H^2_reg = ((N-1) H^1 - sum_i H^1 o sigma^i) / N; exactly N-antisymmetric.
NdTable regularize_h2(const NdTable& H1_support);

// Trailing-variable reduction for families whose last `zero_tail` fields
// vanish: the
// momenta paired with the trailing variables are pinned to 0, so the output
// depends only on the first N - zero_tail variables (exactly, by construction).
struct H0Result {
  NdTable h0_support;    // support^N, constant in the trailing slots
  NdTable F0;            // support^{N - zero_tail} core values
  Eigen::MatrixXd F;     // two-variable emission when N - zero_tail == 2
  double tau = 0.0;
  SubantisymReport subanti;
};

H0Result regularize_h0(const HamiltonianTable& H, const EvalGrid& grid, int zero_tail);

struct AuditItem {
  bool pass = false;
  double worst = 0.0;
  std::vector<int> witness;  // worst tuple, when naturally indexed
  std::string note;
};

// The six pipeline properties. Convexity in the last N-1 variables and the orderings
// are exact discrete inequalities (tolerance 1e-9); concavity in the first
// variable, sub-antisymmetry and domination are grid-limited (tolerance tau).
struct PipelineAuditReport {
  AuditItem concavity_slot1;
  AuditItem convexity_tail;
  AuditItem h2_antisym;
  AuditItem domination;
  AuditItem l_ordering;
  AuditItem l_bound;
  AuditItem h1_bound;
  AuditItem lipschitz;
  bool all_pass = false;
  double tau = 0.0;
  double measured_subanti = 0.0;  // positive part of the worst H1 orbit sum
  double empirical_coeff = 0.0;   // measured_subanti * m / R
};

PipelineAuditReport audit_pipeline(const HamiltonianTable& H, const EvalGrid& grid);
PipelineAuditReport audit_pipeline(const RegPipeline& pipe);

// Partial convexification check at one support atom: the (ball-grid) biconjugate of
// H(x, .) extended by +infinity off the support coincides with H(x, .) on
// support tuples, and the two sup expressions for L agree.
struct PartialConvexReport {
  double max_residual = 0.0;  // max over support tuples of |f - f**|
  double also_gap = 0.0;      // max over p of |sup_support - sup_combined|
  NdTable biconjugate;        // (f~_x)** tabulated on support^{N-1}
};

PartialConvexReport partial_convexification(const NdTable& H_support, int x,
                                            const EvalGrid& grid);

}  // namespace symot
