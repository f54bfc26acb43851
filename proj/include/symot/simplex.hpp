#pragma once

#include <Eigen/Dense>
#include <vector>

namespace symot {

// maximize c.x subject to A x = b, x >= 0, with b >= 0.
//
// Dense two-phase revised simplex with Bland's anti-cycling rule and a fixed
// pivot order, so repeated solves of the same instance are bit-identical.
// Redundant equality rows are tolerated: their artificials stay basic at zero
// and the returned duals remain feasible for the full row set.
struct LpSolution {
  bool feasible = false;
  double value = 0.0;
  Eigen::VectorXd x;   // primal solution over the real columns
  Eigen::VectorXd y;   // one dual multiplier per row
  int iterations = 0;
};

LpSolution simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, double tol = 1e-9);

}  // namespace symot
