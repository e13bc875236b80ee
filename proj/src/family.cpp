#include "nsplab/family.hpp"

#include "nsplab/lp.hpp"
#include "nsplab/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace nsplab {

std::vector<VectorXd> moment_curve_points(int d, const std::vector<double>& ts) {
  if (d < 1) throw InvalidInput("moment_curve_points: dimension must be at least 1");
  std::set<double> seen;
  std::vector<VectorXd> out;
  for (double t : ts) {
    if (t == 0.0) throw InvalidInput("moment_curve_points: t = 0 gives the origin");
    if (!std::isfinite(t)) throw InvalidInput("moment_curve_points: t must be finite");
    if (!seen.insert(t).second) throw InvalidInput("moment_curve_points: duplicate t");
    VectorXd p(d);
    double power = 1.0;
    for (int j = 0; j < d; ++j) {
      power *= t;
      p(j) = power;
    }
    out.push_back(p);
  }
  return out;
}

bool is_interior_point(const std::vector<VectorXd>& raw_points, const VectorXd& raw_p) {
  if (raw_points.empty()) return false;
  const int d = static_cast<int>(raw_p.size());
  // Per-axis rescaling is linear and preserves interiority.
  VectorXd scale = raw_p.cwiseAbs();
  for (const auto& x : raw_points) scale = scale.cwiseMax(x.cwiseAbs());
  for (auto& x : scale) x = x > 0 ? 1.0 / x : 1.0;
  std::vector<VectorXd> points;
  for (const auto& x : raw_points) points.emplace_back(x.cwiseProduct(scale));
  const VectorXd p = raw_p.cwiseProduct(scale);
  MatrixXd diffs(d, points.size());
  for (std::size_t i = 0; i < points.size(); ++i) diffs.col(i) = points[i] - p;
  const Eigen::JacobiSVD<MatrixXd> svd(diffs);
  const auto& sv = svd.singularValues();
  if (sv.size() < d || sv(d - 1) <= 1e-12 * std::max(1.0, sv(0))) return false;

  // max tau s.t. sum l_i w_i = p, sum l_i = 1, l_i >= tau.
  LpBuilder lp;
  const int l0 = lp.add_variables(static_cast<int>(points.size()), -kInf, kInf);
  const int tau = lp.add_variable(-kInf, 1.0, 1.0);
  for (int j = 0; j < d; ++j) {
    LpBuilder::Row row;
    for (std::size_t i = 0; i < points.size(); ++i) row.emplace_back(l0 + static_cast<int>(i), points[i](j));
    lp.add_equal(row, p(j));
  }
  LpBuilder::Row sum;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum.emplace_back(l0 + static_cast<int>(i), 1.0);
    lp.add_greater_equal({{l0 + static_cast<int>(i), 1.0}, {tau, -1.0}}, 0.0);
  }
  lp.add_equal(sum, 1.0);
  const LpSolution sol = solve_lp(lp.build(LpSense::kMaximize));
  if (sol.status != LpStatus::kOptimal) return false;
  return sol.objective > 1e-12;
}

FamilyInstance build_family(int m, int k, const std::optional<std::vector<double>>& ts,
                            bool normalize_columns) {
  if (m < 3) throw InvalidInput("build_family: m must be at least 3");
  if (k <= m) throw InvalidInput("build_family: k must exceed m");
  FamilyInstance inst;
  inst.m = m;
  inst.k = k;
  inst.s_star = m / 2 - 1;
  if (ts) {
    if (static_cast<int>(ts->size()) != k - 1) {
      throw InvalidInput("build_family: expected k-1 = " + std::to_string(k - 1) + " t-values");
    }
    inst.ts = *ts;
  } else {
    for (int i = 1; i < k; ++i) inst.ts.push_back(i);
  }
  const int d = m - 2;
  for (double t : inst.ts) {
    if (std::pow(std::abs(t), d) > 1e12) {
      throw InvalidInput("build_family: |t|^(m-2) exceeds 1e12; rescale the t-values");
    }
  }
  const std::vector<VectorXd> pts = moment_curve_points(d, inst.ts);
  VectorXd p = VectorXd::Zero(d);
  for (const auto& x : pts) p += x;
  p /= static_cast<double>(pts.size());
  if (!is_interior_point(pts, p)) throw NumericalFailure("build_family: centroid is not interior");
  inst.interior_point = p;

  inst.a = MatrixXd::Zero(m, k + 1);
  inst.a.col(0).head(d) = p;
  inst.a(d, 0) = 1.0;
  inst.a.col(1).head(d) = p;
  inst.a(d + 1, 1) = 1.0;
  for (int i = 0; i < k - 1; ++i) inst.a.col(i + 2).head(d) = pts[i];
  if (normalize_columns) {
    for (Eigen::Index j = 0; j < inst.a.cols(); ++j) inst.a.col(j).normalize();
    inst.columns_normalized = true;
  }
  std::vector<int> sizes(k, 1);
  sizes[0] = 2;
  inst.partition = BlockPartition::FromSizes(sizes);
  return inst;
}

bool FamilyReport::valid() const {
  return std::all_of(checks.begin(), checks.end(), [](const FamilyCheck& c) { return c.matches(); });
}

namespace {

FamilyCheck from_verdict(std::string name, const NspVerdict& v, std::optional<bool> expected) {
  FamilyCheck c;
  c.name = std::move(name);
  c.order = v.order;
  c.expected = expected;
  c.observed = v.holds;
  c.method = to_string(v.method);
  c.conclusive = v.method == NspMethod::kExact;
  c.witness = v.witness;
  return c;
}

}  // namespace

FamilyReport validate_family(const FamilyInstance& inst, const NspOptions& opt) {
  FamilyReport report;
  for (int s = 1; s <= inst.s_star; ++s) {
    report.checks.push_back(
        from_verdict("nsp-block-nonneg", check_nsp_block_nonneg(inst.a, inst.partition, s, opt), true));
  }
  const bool full_claim = inst.m >= 12 && inst.s_star >= 1;

  FamilyCheck face;
  face.name = "spans-face-w1-w2";
  face.order = 2;
  face.observed = spans_face(PointSet::FromColumns(inst.a), {0, 1});
  face.method = "exact";
  if (full_claim) face.expected = false;
  report.checks.push_back(face);

  if (full_claim) {
    report.checks.push_back(
        from_verdict("nsp-nonneg", check_nsp_nonneg(inst.a, inst.s_star, opt), false));
    report.checks.push_back(from_verdict(
        "nsp-block-q1", check_nsp_block(inst.a, inst.partition, inst.s_star, NormIndex::kOne, opt),
        false));
  }
  return report;
}

}  // namespace nsplab
