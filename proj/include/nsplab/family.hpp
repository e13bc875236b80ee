#pragma once

#include "nsplab/linalg.hpp"
#include "nsplab/nsp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nsplab {

/// Points (t, t^2, ..., t^d) for each t. The ts must be distinct and nonzero.
std::vector<VectorXd> moment_curve_points(int d, const std::vector<double>& ts);

/// The moment-curve pyramid family: an m x (k+1) matrix with columns
/// [w', w'', w_1, ..., w_{k-1}], w' = (p, 1, 0), w'' = (p, 0, 1),
/// w_i = (curve point i, 0, 0), and blocks (2, 1, ..., 1).
struct FamilyInstance {
  int m = 0;
  int k = 0;
  MatrixXd a;
  BlockPartition partition = BlockPartition::Singletons(1);
  int s_star = 0;  // floor(m/2 - 1)
  std::vector<double> ts;
  VectorXd interior_point;
  bool columns_normalized = false;
};

/// Requires k > m >= 3 and, when given, k - 1 distinct nonzero ts with
/// |t|^(m-2) <= 1e12. Defaults to ts = 1..k-1 and p = centroid.
FamilyInstance build_family(int m, int k, const std::optional<std::vector<double>>& ts = {},
                            bool normalize_columns = false);

/// p lies in the interior of conv(points): positive barycentric weights and
/// full-rank differences (checked by LP and SVD).
bool is_interior_point(const std::vector<VectorXd>& points, const VectorXd& p);

struct FamilyCheck {
  std::string name;
  int order = 0;
  /// Expected outcome; absent for informational entries.
  std::optional<bool> expected;
  bool observed = false;
  std::string method;
  bool conclusive = true;
  std::optional<Witness> witness;
  bool matches() const { return !expected || (conclusive && *expected == observed); }
};

struct FamilyReport {
  std::vector<FamilyCheck> checks;
  bool valid() const;
};

/// Runs the nonnegative block NSP for orders 1..s*, and for m >= 12 also the
/// nonnegative linear NSP at s*, the face test on {w', w''} and the
/// unrestricted block NSP (q = 1) at s*. Checks with a stated expectation
/// that come out differently make the report invalid.
FamilyReport validate_family(const FamilyInstance& inst, const NspOptions& opt = {});

}  // namespace nsplab
