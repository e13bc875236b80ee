#include "nsplab/family.hpp"
#include "nsplab/nsp.hpp"
#include "nsplab/polytope.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

namespace nsplab {
namespace {

PointSet square() {
  return PointSet({(VectorXd(2) << 0, 0).finished(), (VectorXd(2) << 1, 0).finished(),
                   (VectorXd(2) << 1, 1).finished(), (VectorXd(2) << 0, 1).finished()});
}

TEST(SpansFace, UnitSquare) {
  EXPECT_TRUE(spans_face(square(), {0, 1}));
  EXPECT_FALSE(spans_face(square(), {0, 2}));
  EXPECT_TRUE(spans_face(square(), {3}));
  EXPECT_THROW(spans_face(square(), {}), InvalidInput);
  EXPECT_THROW(spans_face(square(), {4}), InvalidInput);
}

TEST(SpansFace, InteriorPointIsNoFace) {
  PointSet ps({(VectorXd(2) << 0, 0).finished(), (VectorXd(2) << 2, 0).finished(),
               (VectorXd(2) << 0, 2).finished(), (VectorXd(2) << 0.5, 0.5).finished()});
  EXPECT_FALSE(is_vertex(ps, 3));
  EXPECT_TRUE(is_vertex(ps, 0));
}

TEST(PointSet, RejectsCoincidentPoints) {
  EXPECT_THROW(PointSet({VectorXd::Ones(2), VectorXd::Ones(2)}), InvalidInput);
  EXPECT_THROW(PointSet({VectorXd::Zero(2)}, true), InvalidInput);
}

TEST(Neighborly, SquareAndCyclic) {
  EXPECT_TRUE(is_neighborly(square(), 1));
  EXPECT_FALSE(is_neighborly(square(), 2));
  const PointSet cyc(moment_curve_points(4, {1, 2, 3, 4, 5, 6, 7}));
  EXPECT_TRUE(is_neighborly(cyc, 2));
  EXPECT_FALSE(is_neighborly(cyc, 3));
}

TEST(Neighborly, CyclicPolytopesOfHigherDimension) {
  const PointSet cyc6(moment_curve_points(6, {-3, -2, -1, 1, 2, 3, 4, 5}));
  EXPECT_TRUE(is_neighborly(cyc6, 3));
  const PointSet cyc5(moment_curve_points(5, {1, 2, 3, 4, 5, 6, 7}));
  EXPECT_TRUE(is_neighborly(cyc5, 2));
}

TEST(OutwardlyNeighborly, Examples) {
  const PointSet simplex({(VectorXd(3) << 1, 0, 0).finished(), (VectorXd(3) << 0, 1, 0).finished(),
                          (VectorXd(3) << 0, 0, 1).finished()},
                         true);
  for (int s = 1; s <= 3; ++s) EXPECT_TRUE(is_outwardly_neighborly(simplex, s));
  const PointSet line({(VectorXd(1) << 1).finished(), (VectorXd(1) << 2).finished()}, true);
  EXPECT_FALSE(is_outwardly_neighborly(line, 1));
  EXPECT_THROW(is_outwardly_neighborly(square(), 1), InvalidInput);
}

TEST(OutwardlyNeighborly, AgreesWithNonnegNspWhenOriginIsVertex) {
  std::mt19937_64 rng(60);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const MatrixXd a = testing::gaussian(3, 6, rng);
    const PointSet ps = PointSet::FromColumns(a, true);
    if (!is_vertex(ps, ps.size() - 1)) continue;
    for (int s = 1; s <= 2; ++s) {
      EXPECT_EQ(is_outwardly_neighborly(ps, s), check_nsp_nonneg(a, s).holds);
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}

TEST(FaceProperty, SubsetsOfFacesAreFaces) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet ps = PointSet::FromColumns(testing::gaussian(3, 7, rng));
    for (int i = 0; i < 7; ++i) {
      for (int j = i + 1; j < 7; ++j) {
        for (int k = j + 1; k < 7; ++k) {
          if (!spans_face(ps, {i, j, k})) continue;
          EXPECT_TRUE(spans_face(ps, {i, j}));
          EXPECT_TRUE(spans_face(ps, {j, k}));
          EXPECT_TRUE(spans_face(ps, {i}));
        }
      }
    }
  }
}

}  // namespace
}  // namespace nsplab
