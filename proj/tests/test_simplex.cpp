#include <doctest.h>

#include "symot/simplex.hpp"
#include "test_util.hpp"

using namespace symot;

TEST_CASE("simplex solves a 2x2 transport problem (Birkhoff oracle)") {
  // maximize <x,y> coupling on {0,1} with uniform marginals.
  // Vertices of the Birkhoff polytope: identity (value 1/2), swap (value 0).
  Eigen::MatrixXd A(4, 4);
  A << 1, 1, 0, 0,  // row marginal x=0
      0, 0, 1, 1,   // row marginal x=1
      1, 0, 1, 0,   // col marginal y=0
      0, 1, 0, 1;   // col marginal y=1
  Eigen::VectorXd b(4);
  b << 0.5, 0.5, 0.5, 0.5;
  Eigen::VectorXd c(4);
  c << 0, 0, 0, 1;  // c(x,y) = x*y
  const auto sol = simplex_max(A, b, c);
  REQUIRE(sol.feasible);
  CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.x[3] == doctest::Approx(0.5));
  // Dual feasibility: y_r(0)+y_c(0) >= 0 etc.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(sol.y[i] + sol.y[2 + j] >= c[2 * i + j] - 1e-9);
}

TEST_CASE("simplex matches brute-force assignment oracle on random 3x3 instances") {
  const auto perms = tu::all_permutations(3);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    CounterRng rng(seed);
    Eigen::MatrixXd cost(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cost(i, j) = rng.next_range(-2, 2);

    // Oracle: best permutation (LP over the Birkhoff polytope attains at a vertex).
    double oracle = -1e300;
    for (const auto& p : perms) {
      double v = 0.0;
      for (int i = 0; i < 3; ++i) v += cost(i, p[static_cast<std::size_t>(i)]) / 3.0;
      oracle = std::max(oracle, v);
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 9);
    Eigen::VectorXd b = Eigen::VectorXd::Constant(6, 1.0 / 3.0);
    Eigen::VectorXd c(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        A(i, 3 * i + j) = 1.0;
        A(3 + j, 3 * i + j) = 1.0;
        c[3 * i + j] = cost(i, j);
      }
    const auto sol = simplex_max(A, b, c);
    REQUIRE(sol.feasible);
    CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-10));

    // Complementary slackness: basic mass only on tight columns.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double slack = sol.y[i] + sol.y[3 + j] - cost(i, j);
        CHECK(slack >= -1e-9);
        if (sol.x[3 * i + j] > 1e-9) CHECK(slack <= 1e-8);
      }
  }
}

TEST_CASE("simplex reports infeasibility") {
  // x1 + x2 = 1 and x1 + x2 = 2 cannot both hold.
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 2;
  Eigen::VectorXd c(2);
  c << 1, 0;
  CHECK_FALSE(simplex_max(A, b, c).feasible);
}

TEST_CASE("simplex handles redundant rows") {
  // Duplicate marginal row; duals of the reduced system extend by zero.
  Eigen::MatrixXd A(3, 2);
  A << 1, 1, 1, 1, 1, 0;
  Eigen::VectorXd b(3);
  b << 1, 1, 0.25;
  Eigen::VectorXd c(2);
  c << 3, 1;
  const auto sol = simplex_max(A, b, c);
  REQUIRE(sol.feasible);
  CHECK(sol.value == doctest::Approx(0.25 * 3 + 0.75 * 1));
}
