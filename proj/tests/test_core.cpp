#include <doctest.h>

#include "symot/core.hpp"
#include "test_util.hpp"

using namespace symot;
using tu::v1;
using tu::v2;

TEST_CASE("cyclic_shift moves slot 2 to slot 1") {
  CHECK(cyclic_shift({1, 2, 3}, 1) == std::vector<int>{2, 3, 1});
  CHECK(cyclic_shift({1, 2, 3}, 3) == std::vector<int>{1, 2, 3});
  CHECK(cyclic_shift({5, 5}, 1) == std::vector<int>{5, 5});
}

TEST_CASE("cyclic_shift composed N times is the identity") {
  CounterRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = rng.next_int(2, 5);
    std::vector<int> t(static_cast<std::size_t>(N));
    for (auto& x : t) x = rng.next_int(0, 9);
    std::vector<int> s = t;
    for (int k = 0; k < N; ++k) s = cyclic_shift(s, 1);
    CHECK(s == t);
    CHECK(cyclic_shift(t, static_cast<int>(N)) == t);
  }
}

TEST_CASE("SupportSet invariants") {
  CHECK_THROWS_AS(SupportSet({v1(0.0), v1(0.0)}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SupportSet({v1(2.0)}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SupportSet({}, 1.0), std::invalid_argument);
  const SupportSet ok({v1(-1.0), v1(1.0)}, 1.0);
  CHECK(ok.size() == 2);
  CHECK(ok.dim() == 1);
}

TEST_CASE("DiscreteMeasure invariants") {
  auto sup = make_support_1d({0.0, 0.5}, 1.0);
  Eigen::VectorXd bad(2);
  bad << 0.3, 0.3;
  CHECK_THROWS_AS(DiscreteMeasure(sup, bad), std::invalid_argument);
  Eigen::VectorXd neg(2);
  neg << -0.5, 1.5;
  CHECK_THROWS_AS(DiscreteMeasure(sup, neg), std::invalid_argument);
  CHECK(DiscreteMeasure::uniform(sup).is_uniform());
}

TEST_CASE("eval_cost family formulas") {
  auto sup = make_support_1d({0.0, 0.5}, 1.0);

  SUBCASE("quadratic vanishes on the diagonal") {
    const auto spec = CostSpec::quadratic(3);
    CHECK(eval_cost(spec, *sup, {0, 0, 0}) == 0.0);
    CHECK(eval_cost(spec, *sup, {1, 1, 1}) == 0.0);
    CHECK(eval_cost(spec, *sup, {0, 1, 0}) == doctest::Approx(-0.5));
  }

  SUBCASE("plakhov") {
    const auto spec = CostSpec::plakhov();
    CHECK(eval_cost(spec, *sup, {0, 0}) == doctest::Approx(-2.0));
    auto sup2d = make_support({v2(0, 0), v2(0.5, 0)}, 1.0);
    CHECK_THROWS_AS(eval_cost(spec, *sup2d, {0, 1}), std::invalid_argument);
  }

  SUBCASE("coulomb") {
    const auto spec = CostSpec::coulomb(2);
    CHECK(eval_cost(spec, *sup, {0, 1}) == doctest::Approx(-2.0));
    CHECK(is_neg_inf(eval_cost(spec, *sup, {1, 1})));
  }

  SUBCASE("vector field with zero fields") {
    std::vector<std::vector<Vec>> fields{{v1(0.0), v1(0.0)}, {v1(0.0), v1(0.0)}};
    auto fam = std::make_shared<const VectorFieldFamily>(sup, fields, 1.0);
    const auto spec = CostSpec::vector_field(fam);
    CHECK(spec.N == 3);
    CHECK(eval_cost(spec, *sup, {0, 1, 1}) == 0.0);
  }

  SUBCASE("point-level evaluation rejects dimension mismatch") {
    const auto spec = CostSpec::quadratic(2);
    CHECK_THROWS_AS(eval_cost_points(spec, *sup, {v2(0, 0), v2(0, 0.5)}), std::invalid_argument);
    CHECK(eval_cost_points(spec, *sup, {v1(0.0), v1(0.5)}) == doctest::Approx(-0.25));
  }
}

TEST_CASE("build_cost_table") {
  SUBCASE("quadratic 2x2 has zero diagonal") {
    auto sup = make_support_1d({0.0, 1.0}, 1.0);
    const auto table = build_cost_table(CostSpec::quadratic(2), sup);
    CHECK(table.values.at({0, 0}) == 0.0);
    CHECK(table.values.at({1, 1}) == 0.0);
    CHECK(table.values.at({0, 1}) == doctest::Approx(-1.0));
  }

  SUBCASE("coulomb diagonal is NEG_INF") {
    auto sup = make_support_1d({0.0, 1.0}, 1.0);
    const auto table = build_cost_table(CostSpec::coulomb(2), sup);
    CHECK(is_neg_inf(table.values.at({0, 0})));
    CHECK(is_neg_inf(table.values.at({1, 1})));
    CHECK(table.values.at({0, 1}) == doctest::Approx(-1.0));
  }

  SUBCASE("vector field u(x)=x on {0,1} gives [[0,0],[0,1]]") {
    auto sup = make_support_1d({0.0, 1.0}, 1.0);
    std::vector<std::vector<Vec>> fields{{v1(0.0), v1(1.0)}};
    auto fam = std::make_shared<const VectorFieldFamily>(sup, fields, 1.0);
    const auto table = build_cost_table(CostSpec::vector_field(fam), sup);
    CHECK(table.values.at({0, 0}) == 0.0);
    CHECK(table.values.at({0, 1}) == 0.0);
    CHECK(table.values.at({1, 0}) == 0.0);
    CHECK(table.values.at({1, 1}) == 1.0);
  }

  SUBCASE("entry cap guard") {
    auto sup = tu::random_cloud(10, 1, 3);
    CHECK_THROWS_AS(build_cost_table(CostSpec::quadratic(4), sup, 1000), std::length_error);
  }
}

TEST_CASE("quadratic cost table is invariant under cyclic shifts") {
  auto sup = tu::random_cloud(3, 2, 5);
  const auto table = build_cost_table(CostSpec::quadratic(3), sup);
  for_each_cube_tuple(3, 3, [&](const std::vector<int>& t) {
    CHECK(table.values.at(t) == table.values.at(cyclic_shift(t, 1)));
  });
}

TEST_CASE("Coupling constructor enforces mass and nonnegativity") {
  auto sup = make_support_1d({0.0, 1.0}, 1.0);
  NdTable good = NdTable::cube(2, 2);
  good.at({0, 1}) = 0.5;
  good.at({1, 0}) = 0.5;
  CHECK_NOTHROW(Coupling(good, sup));

  NdTable short_mass = NdTable::cube(2, 2);
  short_mass.at({0, 0}) = 0.9;
  CHECK_THROWS_AS(Coupling(short_mass, sup), std::invalid_argument);

  NdTable neg = NdTable::cube(2, 2);
  neg.at({0, 0}) = 1.5;
  neg.at({1, 1}) = -0.5;
  CHECK_THROWS_AS(Coupling(neg, sup), std::invalid_argument);
}

TEST_CASE("NInvolution accepts exactly perm^N = identity") {
  // 4-cycle: order 4.
  CHECK_THROWS_AS(NInvolution({1, 2, 3, 0}, 2), std::invalid_argument);
  CHECK_NOTHROW(NInvolution({1, 2, 3, 0}, 4));
  // transposition: order 2.
  CHECK_NOTHROW(NInvolution({1, 0, 2, 3}, 2));
  CHECK_THROWS_AS(NInvolution({1, 0, 2, 3}, 3), std::invalid_argument);
  // 3-cycle: order 3.
  CHECK_THROWS_AS(NInvolution({1, 2, 0}, 2), std::invalid_argument);
  CHECK_NOTHROW(NInvolution({1, 2, 0}, 3));
  // not a permutation.
  CHECK_THROWS_AS(NInvolution({0, 0, 1}, 2), std::invalid_argument);

  // Brute-force cross-check on all permutations of 4 elements.
  for (const auto& p : tu::all_permutations(4))
    for (int N = 2; N <= 4; ++N)
      CHECK(NInvolution::is_valid(p, N) == tu::perm_power_is_identity(p, N));
}
