#pragma once

#include "nsplab/linalg.hpp"

#include <vector>

namespace nsplab {

/// Candidate vertex set. With include_origin the origin is appended as the
/// last point (index size() - 1 of all_points()).
class PointSet {
 public:
  PointSet(std::vector<VectorXd> points, bool include_origin = false);
  /// Columns of `m` as points.
  static PointSet FromColumns(const MatrixXd& m, bool include_origin = false);

  int dim() const { return dim_; }
  bool include_origin() const { return include_origin_; }
  int num_points() const { return static_cast<int>(points_.size()); }
  /// Points including the origin when flagged.
  const std::vector<VectorXd>& all_points() const { return all_; }
  int size() const { return static_cast<int>(all_.size()); }

 private:
  std::vector<VectorXd> points_;
  std::vector<VectorXd> all_;
  bool include_origin_;
  int dim_;
};

/// True iff some hyperplane c^T w = gamma contains the subset and has every
/// other point at c^T w <= gamma - 1. Indices refer to all_points().
bool spans_face(const PointSet& ps, const std::vector<int>& subset);
bool is_vertex(const PointSet& ps, int index);
/// Every r-subset of all_points() spans a face.
bool is_neighborly(const PointSet& ps, int r);
/// All points (origin included) are vertices and every min(s, n)-subset of
/// the non-origin points spans a face.
bool is_outwardly_neighborly(const PointSet& ps, int s);

}  // namespace nsplab
