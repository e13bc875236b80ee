#include "nsplab/lp.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

namespace nsplab {
namespace {

TEST(Lp, SmallNonnegExample) {
  // min x1 + x2 s.t. x1 - x2 = 1, x >= 0.
  LpBuilder b;
  const int x = b.add_variables(2, 0.0, kInf, 1.0);
  b.add_equal({{x, 1.0}, {x + 1, -1.0}}, 1.0);
  const LpSolution sol = solve_lp(b.build(LpSense::kMinimize));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_NEAR(sol.point(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.point(1), 0.0, 1e-12);
}

TEST(Lp, InfeasibleAndUnbounded) {
  LpBuilder inf;
  const int x = inf.add_variable(0.0, kInf, 1.0);
  inf.add_equal({{x, 1.0}}, -1.0);
  EXPECT_EQ(solve_lp(inf.build(LpSense::kMinimize)).status, LpStatus::kInfeasible);

  LpBuilder unb;
  const int y = unb.add_variable(0.0, kInf, 1.0);
  unb.add_greater_equal({{y, 1.0}}, 1.0);
  EXPECT_EQ(solve_lp(unb.build(LpSense::kMaximize)).status, LpStatus::kUnbounded);
}

TEST(Lp, FreeAndBoundedVariables) {
  // max x + y s.t. x + 2y <= 4, -1 <= x <= 2, y free.
  LpBuilder b;
  const int x = b.add_variable(-1.0, 2.0, 1.0);
  const int y = b.add_variable(-kInf, kInf, 1.0);
  b.add_less_equal({{x, 1.0}, {y, 2.0}}, 4.0);
  const LpSolution sol = solve_lp(b.build(LpSense::kMaximize));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-12);
  EXPECT_NEAR(sol.point(0), 2.0, 1e-12);
  EXPECT_NEAR(sol.point(1), 1.0, 1e-12);
}

TEST(Lp, DegenerateDoesNotCycle) {
  // A classic cycling example for the textbook largest-coefficient rule.
  LpBuilder b;
  const int x = b.add_variables(4, 0.0, kInf);
  b.set_cost(x, -0.75);
  b.set_cost(x + 1, 150);
  b.set_cost(x + 2, -0.02);
  b.set_cost(x + 3, 6);
  b.add_less_equal({{x, 0.25}, {x + 1, -60}, {x + 2, -0.04}, {x + 3, 9}}, 0);
  b.add_less_equal({{x, 0.5}, {x + 1, -90}, {x + 2, -0.02}, {x + 3, 3}}, 0);
  b.add_less_equal({{x + 2, 1}}, 1);
  const LpSolution sol = solve_lp(b.build(LpSense::kMinimize));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, -0.05, 1e-12);
}

TEST(Lp, RedundantEqualityRows) {
  LpBuilder b;
  const int x = b.add_variables(2, 0.0, kInf, 1.0);
  b.add_equal({{x, 1.0}, {x + 1, 1.0}}, 2.0);
  b.add_equal({{x, 2.0}, {x + 1, 2.0}}, 4.0);
  const LpSolution sol = solve_lp(b.build(LpSense::kMinimize));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
}

TEST(Lp, RejectsMalformedProblem) {
  LpProblem p;
  p.c = VectorXd::Zero(2);
  p.a_eq = MatrixXd::Zero(1, 3);
  p.b_eq = VectorXd::Zero(1);
  p.lower = VectorXd::Zero(2);
  p.upper = VectorXd::Zero(2);
  EXPECT_THROW(solve_lp(p), InvalidInput);
}

// Strong duality oracle: min c^T x s.t. Ax = b, x >= 0 against
// max b^T y s.t. A^T y <= c, solved as a separate LP.
TEST(Lp, StrongDualityOnRandomProblems) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 4);
    const int n = m + 1 + static_cast<int>(rng() % 5);
    const MatrixXd a = testing::gaussian(m, n, rng);
    VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0(j) = u(rng);
    const VectorXd b = a * x0;
    VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = u(rng);

    LpBuilder primal;
    const int x = primal.add_variables(n, 0.0, kInf);
    for (int j = 0; j < n; ++j) primal.set_cost(x + j, c(j));
    for (int i = 0; i < m; ++i) {
      LpBuilder::Row row;
      for (int j = 0; j < n; ++j) row.emplace_back(x + j, a(i, j));
      primal.add_equal(row, b(i));
    }
    LpBuilder dual;
    const int y = dual.add_variables(m, -kInf, kInf);
    for (int i = 0; i < m; ++i) dual.set_cost(y + i, b(i));
    for (int j = 0; j < n; ++j) {
      LpBuilder::Row row;
      for (int i = 0; i < m; ++i) row.emplace_back(y + i, a(i, j));
      dual.add_less_equal(row, c(j));
    }
    const LpSolution p = solve_lp(primal.build(LpSense::kMinimize));
    const LpSolution d = solve_lp(dual.build(LpSense::kMaximize));
    ASSERT_EQ(p.status, LpStatus::kOptimal);
    ASSERT_EQ(d.status, LpStatus::kOptimal);
    EXPECT_NEAR(p.objective, d.objective, 1e-8 * std::max(1.0, std::abs(p.objective)));
    EXPECT_LE((a * p.point - b).norm(), 1e-8 * std::max(1.0, b.norm()));
    EXPECT_GE(p.point.minCoeff(), -1e-10);
    ++solved;
  }
  EXPECT_EQ(solved, 60);
}

}  // namespace
}  // namespace nsplab
