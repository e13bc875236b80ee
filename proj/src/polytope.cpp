#include "nsplab/polytope.hpp"

#include "nsplab/lp.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace nsplab {

PointSet::PointSet(std::vector<VectorXd> points, bool include_origin)
    : points_(std::move(points)), include_origin_(include_origin) {
  if (points_.empty()) throw InvalidInput("PointSet: no points");
  dim_ = static_cast<int>(points_.front().size());
  if (dim_ < 1) throw InvalidInput("PointSet: dimension must be at least 1");
  all_ = points_;
  if (include_origin_) all_.push_back(VectorXd::Zero(dim_));
  for (std::size_t i = 0; i < all_.size(); ++i) {
    if (all_[i].size() != dim_) throw InvalidInput("PointSet: points differ in dimension");
    for (std::size_t j = 0; j < i; ++j) {
      if ((all_[i] - all_[j]).cwiseAbs().maxCoeff() <= 1e-12) {
        throw InvalidInput("PointSet: points " + std::to_string(j) + " and " + std::to_string(i) +
                           " coincide");
      }
    }
  }
}

PointSet PointSet::FromColumns(const MatrixXd& m, bool include_origin) {
  std::vector<VectorXd> pts;
  for (Eigen::Index j = 0; j < m.cols(); ++j) pts.emplace_back(m.col(j));
  return PointSet(std::move(pts), include_origin);
}

bool spans_face(const PointSet& ps, const std::vector<int>& subset) {
  if (subset.empty()) throw InvalidInput("spans_face: empty subset");
  const auto& pts = ps.all_points();
  std::vector<char> in(pts.size(), 0);
  for (int i : subset) {
    if (i < 0 || i >= ps.size()) throw InvalidInput("spans_face: index out of range");
    in[i] = 1;
  }
  // Per-axis rescaling is linear, so faces are unchanged.
  VectorXd scale = VectorXd::Zero(ps.dim());
  for (const auto& p : pts) scale = scale.cwiseMax(p.cwiseAbs());
  for (auto& x : scale) x = x > 0 ? 1.0 / x : 1.0;

  LpBuilder lp;
  const int c0 = lp.add_variables(ps.dim(), -kInf, kInf);
  const int gamma = lp.add_variable(-kInf, kInf);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    LpBuilder::Row row;
    for (int j = 0; j < ps.dim(); ++j) {
      const double w = pts[i](j) * scale(j);
      if (w != 0.0) row.emplace_back(c0 + j, w);
    }
    row.emplace_back(gamma, -1.0);
    if (in[i]) {
      lp.add_equal(row, 0.0);
    } else {
      lp.add_less_equal(row, -1.0);
    }
  }
  const LpSolution sol = solve_lp(lp.build(LpSense::kMinimize));
  if (sol.status == LpStatus::kOptimal) return true;
  if (sol.status == LpStatus::kInfeasible) return false;
  throw NumericalFailure(std::string("spans_face: LP ended with status ") + to_string(sol.status));
}

bool is_vertex(const PointSet& ps, int index) { return spans_face(ps, {index}); }

namespace {

double binomial_count(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Every t-subset of {0..n-1} spans a face.
bool all_subsets_span(const PointSet& ps, int n, int t) {
  if (binomial_count(n, t) > 1e6) throw InvalidInput("subset enumeration exceeds 10^6 subsets");
  std::vector<int> idx(t);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!spans_face(ps, idx)) return false;
    int i = t - 1;
    while (i >= 0 && idx[i] == n - t + i) --i;
    if (i < 0) return true;
    ++idx[i];
    for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

bool is_neighborly(const PointSet& ps, int r) {
  if (r < 1) throw InvalidInput("is_neighborly: r must be at least 1");
  return all_subsets_span(ps, ps.size(), std::min(r, ps.size()));
}

bool is_outwardly_neighborly(const PointSet& ps, int s) {
  if (!ps.include_origin()) throw InvalidInput("is_outwardly_neighborly: point set must include the origin");
  if (s < 1) throw InvalidInput("is_outwardly_neighborly: s must be at least 1");
  for (int i = 0; i < ps.size(); ++i) {
    if (!is_vertex(ps, i)) return false;
  }
  return all_subsets_span(ps, ps.num_points(), std::min(s, ps.num_points()));
}

}  // namespace nsplab
