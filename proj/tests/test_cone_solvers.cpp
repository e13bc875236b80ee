#include "nsplab/cone_solvers.hpp"
#include "nsplab/lp.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

namespace nsplab {
namespace {

SymMatrix unit(int n, int i, int j) {
  SymMatrix e(n);
  e.set(i, j, 1.0);
  return e;
}

// min sum |x_i| (or sum x_i with x >= 0) s.t. Ax = b by LP.
double l1_lp(const MatrixXd& a, const VectorXd& b, bool nonneg) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  LpBuilder lp;
  const int p = lp.add_variables(n, 0.0, kInf, 1.0);
  const int q = nonneg ? -1 : lp.add_variables(n, 0.0, kInf, 1.0);
  for (int i = 0; i < m; ++i) {
    LpBuilder::Row row;
    for (int j = 0; j < n; ++j) {
      row.emplace_back(p + j, a(i, j));
      if (!nonneg) row.emplace_back(q + j, -a(i, j));
    }
    lp.add_equal(row, b(i));
  }
  const LpSolution sol = solve_lp(lp.build(LpSense::kMinimize));
  EXPECT_EQ(sol.status, LpStatus::kOptimal);
  return sol.objective;
}

TEST(MatrixSensing, ApplyAndCoordinates) {
  const MatrixSensing s({unit(3, 0, 0), unit(3, 0, 1)});
  SymMatrix x(3);
  x.set(0, 0, 2.0);
  x.set(0, 1, 3.0);
  EXPECT_EQ(s.apply(x), (VectorXd(2) << 2, 6).finished());
  const SymCoordinates c = s.domain();
  EXPECT_LE((s.coordinate_matrix(c) * c.flatten(x) - s.apply(x)).norm(), 1e-14);
  EXPECT_THROW(MatrixSensing({unit(3, 0, 1)}, BlockPartition::Singletons(3)), InvalidInput);
  EXPECT_THROW(MatrixSensing({unit(3, 0, 0), unit(2, 0, 0)}), InvalidInput);
}

TEST(MinNuclear, SingleEntryConstraint) {
  const MatrixSensing s({unit(3, 0, 0)});
  const VectorXd b = VectorXd::Ones(1);
  const MatrixSolveResult r = min_nuclear(s, b, false, {});
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
  const MatrixSolveResult p = min_nuclear(s, b, true, {});
  EXPECT_NEAR(p.objective, 1.0, 1e-6);
  EXPECT_NEAR(p.x(0, 0), 1.0, 1e-6);
  EXPECT_GE(symeig(p.x).eigenvalues.minCoeff(), 0.0);
}

TEST(MinNuclear, DiagonalInstancesMatchLp) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 5, m = 3;
    const MatrixXd a = testing::gaussian(m, n, rng);
    VectorXd x0 = VectorXd::Zero(n);
    x0(static_cast<int>(rng() % n)) = 1.0;
    const VectorXd b = a * x0;
    // Only diagonal entries may be nonzero: pin all off-diagonal entries.
    std::vector<SymMatrix> mats;
    for (int p = 0; p < m; ++p) mats.push_back(SymMatrix::Diagonal(a.row(p).transpose()));
    VectorXd bb = VectorXd::Zero(m + n * (n - 1) / 2);
    bb.head(m) = b;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        SymMatrix e(n);
        e.set(i, j, 1.0);
        mats.push_back(e);
      }
    }
    const MatrixSensing s(mats);
    const double lp = l1_lp(a, b, false);
    const double lp_nonneg = l1_lp(a, b, true);
    EXPECT_NEAR(min_nuclear(s, bb, false, {}).objective, lp, 1e-5 * std::max(1.0, lp));
    EXPECT_NEAR(min_nuclear(s, bb, true, {}).objective, lp_nonneg, 1e-5 * std::max(1.0, lp_nonneg));
  }
}

TEST(MinNuclear, BlockResultIsBlockDiagonal) {
  const BlockPartition p({{0, 1}, {2}}, 3);
  SymMatrix a1(3);
  a1.set(0, 0, 1.0);
  a1.set(2, 2, 1.0);
  SymMatrix a2(3);
  a2.set(0, 1, 1.0);
  const MatrixSensing s({a1, a2}, p);
  const MatrixSolveResult r = min_nuclear(s, (VectorXd(2) << 1, 0.5).finished(), false, p);
  EXPECT_EQ(r.x(0, 2), 0.0);
  EXPECT_EQ(r.x(1, 2), 0.0);
  EXPECT_LE(r.residual, 1e-6);
}

TEST(MinGroupNorm, MatchesLpForQOne) {
  std::mt19937_64 rng(13);
  const BlockPartition p = BlockPartition::FromSizes({2, 2, 2});
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd a = testing::gaussian(3, 6, rng);
    const VectorXd b = a * (VectorXd(6) << 1, 0.5, 0, 0, 0, 0).finished();
    const VectorSolveResult r = min_group_norm(a, b, p, NormIndex::kOne, false);
    const double lp = l1_lp(a, b, false);
    EXPECT_NEAR(r.objective, lp, 1e-5 * std::max(1.0, lp));
  }
}

TEST(MinGroupNorm, GroupNormIsLowerBoundedByFeasiblePoint) {
  std::mt19937_64 rng(17);
  const BlockPartition p = BlockPartition::FromSizes({2, 2, 2});
  const MatrixXd a = testing::gaussian(4, 6, rng);
  const VectorXd x0 = (VectorXd(6) << 1, -1, 0, 0, 0, 0).finished();
  const VectorSolveResult r = min_group_norm(a, a * x0, p, NormIndex::kTwo, false);
  EXPECT_TRUE(r.diagnostics.converged);
  EXPECT_LE(r.objective, mixed_norm_q1(x0, p, NormIndex::kTwo) + 1e-6);
  EXPECT_LE(r.residual, 1e-6);
}

TEST(ProjectL1Ball, Properties) {
  const VectorXd v = (VectorXd(3) << 3, -1, 0.5).finished();
  const VectorXd p = project_l1_ball(v, 1.0);
  EXPECT_NEAR(p.lpNorm<1>(), 1.0, 1e-12);
  EXPECT_EQ(p, (VectorXd(3) << 1, 0, 0).finished());
  const VectorXd inside = (VectorXd(2) << 0.2, -0.3).finished();
  EXPECT_EQ(project_l1_ball(inside, 1.0), inside);
  // Projection optimality: <v - p, y - p> <= 0 for y in the ball.
  for (int i = 0; i < 3; ++i) {
    for (double sgn : {-1.0, 1.0}) {
      VectorXd y = VectorXd::Zero(3);
      y(i) = sgn;
      EXPECT_LE((v - p).dot(y - p), 1e-12);
    }
  }
}

}  // namespace
}  // namespace nsplab
