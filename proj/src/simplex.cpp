#include "symot/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symot {

namespace {

struct Tableau {
  // Columns 0..n-1 are the real variables, n..n+m-1 the artificials.
  const Eigen::MatrixXd& A;
  const Eigen::VectorXd& b;
  int m, n;
  std::vector<int> basis;  // size m, column indices

  Eigen::VectorXd column(int j) const {
    if (j < n) return A.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j - n] = 1.0;
    return e;
  }
};

// One simplex phase: maximize cost.x over the current basis, Bland's rule.
// `allow_enter(j)` restricts the entering candidates (phase 2 bars artificials).
template <class CostAt, class AllowEnter>
int run_phase(Tableau& tb, CostAt cost_at, AllowEnter allow_enter, double tol, int max_iters) {
  const int total = tb.n + tb.m;
  int iters = 0;
  for (;; ++iters) {
    if (iters > max_iters) throw std::runtime_error("simplex: iteration limit exceeded");
    Eigen::MatrixXd B(tb.m, tb.m);
    Eigen::VectorXd cB(tb.m);
    for (int i = 0; i < tb.m; ++i) {
      B.col(i) = tb.column(tb.basis[static_cast<std::size_t>(i)]);
      cB[i] = cost_at(tb.basis[static_cast<std::size_t>(i)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd y = lu.transpose().solve(cB);
    const Eigen::VectorXd xB = lu.solve(tb.b);

    // Bland: smallest-index column with positive reduced cost enters.
    int enter = -1;
    for (int j = 0; j < total; ++j) {
      if (!allow_enter(j)) continue;
      bool basic = false;
      for (int bidx : tb.basis)
        if (bidx == j) {
          basic = true;
          break;
        }
      if (basic) continue;
      const double red = cost_at(j) - y.dot(tb.column(j));
      if (red > tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return iters;

    // Bland again for the leaving row: min ratio, ties to the smallest
    // basic-variable index.
    const Eigen::VectorXd w = lu.solve(tb.column(enter));
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < tb.m; ++i) {
      if (w[i] <= tol) continue;
      const double ratio = std::max(xB[i], 0.0) / w[i];
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio &&
           tb.basis[static_cast<std::size_t>(i)] < tb.basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw std::runtime_error("simplex: unbounded (cost not bounded above)");
    tb.basis[static_cast<std::size_t>(leave)] = enter;
  }
}

}  // namespace

LpSolution simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex_max: shape mismatch");
  for (int i = 0; i < m; ++i)
    if (b[i] < -tol) throw std::invalid_argument("simplex_max: requires b >= 0");

  Tableau tb{A, b, m, n, {}};
  tb.basis.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) tb.basis[static_cast<std::size_t>(i)] = n + i;

  const int max_iters = 20000 + 500 * (m + n);

  // Phase 1: maximize -sum(artificials).
  auto phase1_cost = [&](int j) { return j < n ? 0.0 : -1.0; };
  int iters = run_phase(
      tb, phase1_cost, [&](int) { return true; }, tol, max_iters);

  LpSolution sol;
  {
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = tb.column(tb.basis[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd xB = Eigen::PartialPivLU<Eigen::MatrixXd>(B).solve(b);
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (tb.basis[static_cast<std::size_t>(i)] >= n) infeas += std::abs(xB[i]);
    if (infeas > 1e-7) {
      sol.feasible = false;
      return sol;
    }
  }

  // Phase 2: artificials stay at zero and may leave but never re-enter.
  auto phase2_cost = [&](int j) { return j < n ? c[j] : 0.0; };
  iters += run_phase(
      tb, phase2_cost, [&](int j) { return j < n; }, tol, max_iters);

  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cB(m);
  for (int i = 0; i < m; ++i) {
    B.col(i) = tb.column(tb.basis[static_cast<std::size_t>(i)]);
    cB[i] = phase2_cost(tb.basis[static_cast<std::size_t>(i)]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  const Eigen::VectorXd xB = lu.solve(b);

  sol.feasible = true;
  sol.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int j = tb.basis[static_cast<std::size_t>(i)];
    if (j < n) sol.x[j] = std::max(xB[i], 0.0);
  }
  sol.y = lu.transpose().solve(cB);
  sol.value = c.dot(sol.x);
  sol.iterations = iters;
  return sol;
}

}  // namespace symot
