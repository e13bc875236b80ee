#include "nsplab/linalg.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace nsplab {
namespace {

using testing::random_sym;

TEST(SymMatrix, SymmetrizesAndRejectsAsymmetry) {
  MatrixXd m(2, 2);
  m << 1, 2, 2 + 1e-10, 3;
  const SymMatrix s(m);
  EXPECT_DOUBLE_EQ(s(0, 1), s(1, 0));
  m(1, 0) = 5;
  EXPECT_THROW(SymMatrix{m}, InvalidInput);
  EXPECT_THROW(SymMatrix{MatrixXd(2, 3)}, InvalidInput);
}

TEST(SymMatrix, UpperTriangleRoundTrip) {
  const SymMatrix s = SymMatrix::FromUpperTriangle(3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(s(2, 0), 3);
  EXPECT_EQ(s(1, 2), 5);
  EXPECT_EQ(s.UpperTriangle(), (std::vector<double>{1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(SymMatrix::FromUpperTriangle(3, {1, 2}), InvalidInput);
}

TEST(BlockPartition, Validates) {
  EXPECT_THROW(BlockPartition({{0}, {0, 1}}, 2), InvalidInput);
  EXPECT_THROW(BlockPartition({{0}}, 2), InvalidInput);
  EXPECT_THROW(BlockPartition({{0}, {}}, 1), InvalidInput);
  const BlockPartition p({{2, 0}, {1}}, 3);
  EXPECT_EQ(p.block(0), (std::vector<int>{0, 2}));
  EXPECT_EQ(p.block_of(1), 1);
  EXPECT_EQ(BlockPartition::FromSizes({2, 1}).block(0), (std::vector<int>{0, 1}));
}

TEST(Symeig, DiagonalExample) {
  const Spectrum sp = symeig(SymMatrix::Diagonal((VectorXd(4) << 1, 3, 1, 1).finished()));
  EXPECT_EQ(sp.eigenvalues, (VectorXd(4) << 3, 1, 1, 1).finished());
  EXPECT_NEAR(std::abs(sp.eigenvectors(1, 0)), 1.0, 1e-15);
}

TEST(Symeig, ZeroAndOneByOne) {
  EXPECT_EQ(symeig(SymMatrix(3)).eigenvalues, VectorXd::Zero(3));
  SymMatrix one(1);
  one.set(0, 0, -2);
  const Spectrum sp = symeig(one);
  EXPECT_EQ(sp.eigenvalues(0), -2);
  EXPECT_EQ(sp.eigenvectors(0, 0), 1);
}

TEST(Symeig, ReconstructsAndMatchesReferenceSolver) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const SymMatrix m = random_sym(n, rng);
    const Spectrum sp = symeig(m);
    const MatrixXd rec = sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.transpose();
    EXPECT_LE((rec - m.matrix()).norm(), 1e-10 * std::max(1.0, m.frobenius()));
    EXPECT_LE((sp.eigenvectors.transpose() * sp.eigenvectors - MatrixXd::Identity(n, n)).norm(), 1e-12);
    for (int i = 1; i < n; ++i) EXPECT_GE(sp.eigenvalues(i - 1), sp.eigenvalues(i));
    Eigen::SelfAdjointEigenSolver<MatrixXd> ref(m.matrix());
    const VectorXd ref_desc = ref.eigenvalues().reverse();
    EXPECT_LE((ref_desc - sp.eigenvalues).norm(), 1e-10 * std::max(1.0, m.frobenius()));
  }
}

TEST(Symeig, Deterministic) {
  std::mt19937_64 rng(3);
  const SymMatrix m = random_sym(7, rng);
  const Spectrum a = symeig(m), b = symeig(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(Norms, NuclearAndMixed) {
  const SymMatrix d = SymMatrix::Diagonal((VectorXd(4) << 3, -1, 1, 1).finished());
  EXPECT_NEAR(nuclear_norm(d), 6.0, 1e-14);
  const BlockPartition p({{0}, {1}, {2, 3}}, 4);
  EXPECT_NEAR(mixed_norm_star1(d, p), 6.0, 1e-14);
  SymMatrix off(4);
  off.set(0, 3, 5.0);
  EXPECT_EQ(mixed_norm_star1(off, p), 0.0);

  const VectorXd v = (VectorXd(4) << 3, -4, 1, 0).finished();
  const BlockPartition q({{0, 1}, {2, 3}}, 4);
  EXPECT_NEAR(mixed_norm_q1(v, q, NormIndex::kTwo), 6.0, 1e-14);
  EXPECT_NEAR(mixed_norm_q1(v, q, NormIndex::kOne), 8.0, 1e-14);
  EXPECT_NEAR(mixed_norm_q1(v, q, NormIndex::kInf), 5.0, 1e-14);
  EXPECT_EQ(block_norms(v, q, NormIndex::kInf), (VectorXd(2) << 4, 1).finished());
  EXPECT_EQ(parse_norm_index(2), NormIndex::kTwo);
  EXPECT_THROW(parse_norm_index(3), InvalidInput);
}

TEST(Norms, NuclearIsUnitarilyInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix m = random_sym(6, rng);
    Eigen::HouseholderQR<MatrixXd> qr(testing::gaussian(6, 6, rng));
    const MatrixXd q = qr.householderQ();
    const SymMatrix rotated(MatrixXd(q * m.matrix() * q.transpose()));
    EXPECT_NEAR(nuclear_norm(rotated), nuclear_norm(m), 1e-10);
  }
}

TEST(SignedSplit, VectorAndMatrix) {
  const auto [p, n] = signed_split((VectorXd(3) << 1, -2, 0).finished());
  EXPECT_EQ(p, (VectorXd(3) << 1, 0, 0).finished());
  EXPECT_EQ(n, (VectorXd(3) << 0, 2, 0).finished());

  std::mt19937_64 rng(9);
  const SymMatrix x = random_sym(5, rng);
  const auto [xp, xn] = signed_split(x);
  EXPECT_LE((xp - xn - x).frobenius(), 1e-12);
  EXPECT_GE(symeig(xp).eigenvalues.minCoeff(), -1e-12);
  EXPECT_GE(symeig(xn).eigenvalues.minCoeff(), -1e-12);
  EXPECT_NEAR(nuclear_norm(x), xp.trace() + xn.trace(), 1e-12);

  const BlockPartition part({{0, 1}, {2, 3, 4}}, 5);
  const auto [bp, bn] = signed_split(x, part);
  EXPECT_LE((bp - bn - block_diagonal_part(x, part)).frobenius(), 1e-12);
}

TEST(PsdProject, NearestPsd) {
  const SymMatrix d = SymMatrix::Diagonal((VectorXd(3) << 2, -1, 0).finished());
  EXPECT_LE((psd_project(d) - SymMatrix::Diagonal((VectorXd(3) << 2, 0, 0).finished())).frobenius(), 1e-14);
  std::mt19937_64 rng(2);
  const SymMatrix x = random_sym(6, rng);
  const SymMatrix p = psd_project(x);
  EXPECT_GE(symeig(p).eigenvalues.minCoeff(), -1e-12);
  // x - P(x) is NSD and orthogonal to P(x).
  EXPECT_LE(symeig(x - p).eigenvalues.maxCoeff(), 1e-12);
  EXPECT_NEAR((x - p).dot(p), 0.0, 1e-10);
}

TEST(SymCoordinates, IsometryAndRoundTrip) {
  std::mt19937_64 rng(4);
  const SymCoordinates c(5);
  EXPECT_EQ(c.size(), 15);
  const SymMatrix a = random_sym(5, rng), b = random_sym(5, rng);
  EXPECT_NEAR(c.flatten(a).dot(c.flatten(b)), a.dot(b), 1e-12);
  EXPECT_LE((c.unflatten(c.flatten(a)) - a).frobenius(), 1e-14);

  const BlockPartition p({{0, 1}, {2}, {3, 4}}, 5);
  const SymCoordinates cb(p);
  EXPECT_EQ(cb.size(), 3 + 1 + 3);
  EXPECT_LE((cb.unflatten(cb.flatten(a)) - block_diagonal_part(a, p)).frobenius(), 1e-14);
}

}  // namespace
}  // namespace nsplab
