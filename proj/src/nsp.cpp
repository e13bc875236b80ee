#include "nsplab/nsp.hpp"

#include "nsplab/lp.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace nsplab {

namespace {

constexpr double kNoViolation = std::numeric_limits<double>::infinity();

using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

MatrixXd null_basis(const MatrixXd& m) {
  const auto cols = m.cols();
  if (m.rows() == 0 || m.isZero(0.0)) return MatrixXd::Identity(cols, cols);
  // Row scaling leaves the null space unchanged and tames graded rows.
  MatrixXl scaled = m.cast<long double>();
  for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
    const long double mx = scaled.row(r).cwiseAbs().maxCoeff();
    if (mx > 0) scaled.row(r) /= mx;
  }
  const Eigen::JacobiSVD<MatrixXl> svd(scaled, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const long double tol =
      static_cast<long double>(std::max(m.rows(), cols)) * DBL_EPSILON * sv(0);
  if (sv(0) == 0) return MatrixXd::Identity(cols, cols);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  MatrixXd basis = svd.matrixV().rightCols(cols - rank).cast<double>();
  if (basis.cols() == 1) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, 0)) > 1e-12) {
        if (basis(i, 0) < 0) basis = -basis;
        break;
      }
    }
  }
  return basis;
}

NullSpaceBasis null_space_over(const MatrixSensing& sensing, const SymCoordinates& coords) {
  NullSpaceBasis nb;
  nb.coords = null_basis(sensing.coordinate_matrix(coords));
  nb.dim = static_cast<int>(nb.coords.cols());
  nb.sym = coords;
  return nb;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (std::int64_t{1} << 52)) return std::numeric_limits<std::int64_t>::max();
  }
  return r;
}

void guard_subsets(int k, int t, const NspOptions& opt) {
  if (binomial(k, t) > opt.max_subsets) {
    throw InvalidInput("subset enumeration C(" + std::to_string(k) + "," + std::to_string(t) +
                       ") exceeds the limit of " + std::to_string(opt.max_subsets));
  }
}

// Calls f on every t-subset of {0..n-1} in lexicographic order until f returns false.
template <class F>
void for_each_combination(int n, int t, F&& f) {
  std::vector<int> idx(t);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!f(static_cast<const std::vector<int>&>(idx))) return;
    int i = t - 1;
    while (i >= 0 && idx[i] == n - t + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<int> complement(const std::vector<int>& in, int n) {
  std::vector<char> mark(n, 0);
  for (int i : in) mark[i] = 1;
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (!mark[i]) out.push_back(i);
  }
  return out;
}

std::vector<int> block_union(const BlockPartition& p, const std::vector<int>& blocks) {
  std::vector<int> out;
  for (int b : blocks) out.insert(out.end(), p.block(b).begin(), p.block(b).end());
  std::sort(out.begin(), out.end());
  return out;
}

MatrixXd select_rows(const MatrixXd& m, const std::vector<int>& rows) {
  MatrixXd out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

// Positions sorted by value descending; ties keep index order.
std::vector<int> order_desc(const VectorXd& x) {
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return x(a) > x(b); });
  return idx;
}

// sum(rest) - sum(top t) of nonnegative scores, with the top-t positions.
double top_split_margin(const VectorXd& scores, int t, std::vector<int>* support) {
  const std::vector<int> ord = order_desc(scores);
  double margin = 0.0;
  for (std::size_t r = 0; r < ord.size(); ++r) margin += static_cast<int>(r) < t ? -scores(ord[r]) : scores(ord[r]);
  if (support) {
    support->assign(ord.begin(), ord.begin() + std::min<std::size_t>(t, ord.size()));
    std::sort(support->begin(), support->end());
  }
  return margin;
}

VectorXd abs_values(const VectorXd& x) { return x.cwiseAbs(); }

double premise_tol(double scale) { return 1e-8 * std::max(1.0, scale); }

// ---------------------------------------------------------------------------
// LP subproblems on a fixed coordinate split (in = S coordinates).

struct SubsetOutcome {
  bool lp_failure = false;
  double margin = kNoViolation;
  VectorXd c;
};

// Kernel direction of N_out, if rank-deficient.
std::optional<VectorXd> kernel_direction(const MatrixXd& n_out, int d) {
  if (n_out.rows() == 0) return VectorXd(VectorXd::Unit(d, 0));
  if (n_out.rows() < d) {
    const Eigen::JacobiSVD<MatrixXd> svd(n_out, Eigen::ComputeFullV);
    return VectorXd(svd.matrixV().col(d - 1));
  }
  const Eigen::JacobiSVD<MatrixXd> svd(n_out, Eigen::ComputeFullV);
  if (svd.singularValues()(d - 1) <= 1e-9) return VectorXd(svd.matrixV().col(d - 1));
  return std::nullopt;
}

double l1_margin(const VectorXd& v, const std::vector<int>& in, const std::vector<int>& out) {
  double m = 0.0;
  for (int j : out) m += std::abs(v(j));
  for (int j : in) m -= std::abs(v(j));
  return m;
}

double nonneg_margin(const VectorXd& v, const std::vector<int>& in, const std::vector<int>& out) {
  const double tol = premise_tol(v.cwiseAbs().maxCoeff());
  double m = 0.0;
  for (int j : out) {
    if (v(j) > tol) return kNoViolation;
    m += std::abs(v(j));
  }
  for (int j : in) m -= v(j);
  return m;
}

// max ||v_in||_1 subject to ||v_out||_1 <= 1, v = N c, one LP per sign class.
SubsetOutcome sign_lp(const MatrixXd& n, const std::vector<int>& in, const std::vector<int>& out,
                      double mu) {
  const int d = static_cast<int>(n.cols());
  SubsetOutcome res;
  const MatrixXd n_out = select_rows(n, out);
  if (auto k = kernel_direction(n_out, d)) {
    res.c = *k;
    res.margin = l1_margin(n * *k, in, out);
    return res;
  }
  if (in.size() > 24) throw InvalidInput("sign enumeration over more than 24 coordinates");
  const MatrixXd n_in = select_rows(n, in);
  const std::uint64_t patterns = std::uint64_t{1} << (in.size() - 1);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    LpBuilder lp;
    const int c0 = lp.add_variables(d, -kInf, kInf, 0.0);
    const int t0 = lp.add_variables(static_cast<int>(out.size()), 0.0, kInf, 0.0);
    VectorXd sigma(in.size());
    for (std::size_t r = 0; r < in.size(); ++r) sigma(r) = (r > 0 && (mask >> (r - 1)) & 1) ? -1.0 : 1.0;
    const VectorXd cost = n_in.transpose() * sigma;
    for (int j = 0; j < d; ++j) lp.set_cost(c0 + j, cost(j));
    LpBuilder::Row sum_row;
    for (std::size_t r = 0; r < out.size(); ++r) {
      LpBuilder::Row pos, neg;
      for (int j = 0; j < d; ++j) {
        pos.emplace_back(c0 + j, n_out(r, j));
        neg.emplace_back(c0 + j, -n_out(r, j));
      }
      pos.emplace_back(t0 + static_cast<int>(r), -1.0);
      neg.emplace_back(t0 + static_cast<int>(r), -1.0);
      lp.add_less_equal(pos, 0.0);
      lp.add_less_equal(neg, 0.0);
      sum_row.emplace_back(t0 + static_cast<int>(r), 1.0);
    }
    lp.add_less_equal(sum_row, 1.0);
    const LpSolution sol = solve_lp(lp.build(LpSense::kMaximize));
    if (sol.status != LpStatus::kOptimal) {
      res.lp_failure = true;
      continue;
    }
    if (sol.objective >= 1.0 - mu) {
      const VectorXd c = sol.point.head(d);
      const double m = l1_margin(n * c, in, out);
      if (m < res.margin) {
        res.margin = m;
        res.c = c;
      }
    }
  }
  return res;
}

// max 1^T v subject to v_out <= 0, sum(v_out) = -1, v = N c.
SubsetOutcome nonneg_lp(const MatrixXd& n, const std::vector<int>& out) {
  const int d = static_cast<int>(n.cols());
  SubsetOutcome res;
  const MatrixXd n_out = select_rows(n, out);
  if (auto k = kernel_direction(n_out, d)) {
    VectorXd c = *k;
    if ((n * c).sum() < 0) c = -c;
    res.c = c;
    res.margin = -(n * c).sum();
    return res;
  }
  LpBuilder lp;
  const int c0 = lp.add_variables(d, -kInf, kInf, 0.0);
  const VectorXd cost = n.colwise().sum().transpose();
  for (int j = 0; j < d; ++j) lp.set_cost(c0 + j, cost(j));
  for (std::size_t r = 0; r < out.size(); ++r) {
    LpBuilder::Row row;
    for (int j = 0; j < d; ++j) row.emplace_back(c0 + j, n_out(r, j));
    lp.add_less_equal(row, 0.0);
  }
  const VectorXd out_sum = n_out.colwise().sum().transpose();
  LpBuilder::Row norm_row;
  for (int j = 0; j < d; ++j) norm_row.emplace_back(c0 + j, out_sum(j));
  lp.add_equal(norm_row, -1.0);
  const LpSolution sol = solve_lp(lp.build(LpSense::kMaximize));
  if (sol.status == LpStatus::kInfeasible) return res;
  if (sol.status != LpStatus::kOptimal) {
    res.lp_failure = true;
    return res;
  }
  res.c = sol.point.head(d);
  res.margin = -sol.objective;
  return res;
}

// Shared driver for the four LP-exact vector properties: every |S| = min(s, k)
// block subset is tested; smaller subsets are implied.
NspVerdict vector_lp_check(const MatrixXd& a, const BlockPartition& p, int s, bool nonneg,
                           const NspOptions& opt) {
  if (s < 0) throw InvalidInput("order s must be nonnegative");
  if (p.dim() != a.cols()) throw InvalidInput("partition/dimension mismatch");
  NspVerdict v;
  v.order = s;
  const MatrixXd n = null_basis(a);
  v.null_dim = static_cast<int>(n.cols());
  if (v.null_dim == 0 || s == 0) {
    v.note = v.null_dim == 0 ? "trivial null space" : "order 0 is vacuous";
    return v;
  }
  const int k = p.num_blocks();
  const int t = std::min(s, k);
  guard_subsets(k, t, opt);
  bool lp_failure = false;
  for_each_combination(k, t, [&](const std::vector<int>& blocks) {
    ++v.subsets_checked;
    const std::vector<int> in = block_union(p, blocks);
    const std::vector<int> out = complement(in, p.dim());
    SubsetOutcome r = nonneg ? nonneg_lp(n, out) : sign_lp(n, in, out, opt.mu);
    lp_failure |= r.lp_failure;
    if (r.margin <= opt.mu && (!v.witness || r.margin < v.witness->margin)) {
      const VectorXd x = n * r.c;
      const double m = nonneg ? nonneg_margin(x, in, out) : l1_margin(x, in, out);
      v.witness = Witness{blocks, Signal(x), m};
      if (opt.stop_at_first_violation) return false;
    }
    return true;
  });
  if (v.witness) {
    v.holds = false;
  } else if (lp_failure) {
    v.holds = false;
    v.method = NspMethod::kInconclusive;
    v.note = "LP subproblem failed";
  }
  return v;
}

// ---------------------------------------------------------------------------
// Parametric analysis on the null-space sphere.

// Margin of N c for the worst S; returns +inf when no S violates the premise.
using MarginFn = std::function<double(const VectorXd& c, std::vector<int>* support)>;

struct AngularOutcome {
  bool violated = false;
  bool inconclusive = false;
  double theta = 0.0;
};

// Certified search for min f on [0, pi) for an L-Lipschitz, pi-periodic f.
AngularOutcome angular_search(const std::function<double(double)>& f, double lipschitz, int grid,
                              double mu) {
  AngularOutcome res;
  const double pi = std::numbers::pi;
  const double h = pi / grid;
  std::vector<double> vals(grid + 1);
  double best = kNoViolation;
  for (int i = 0; i <= grid; ++i) {
    vals[i] = i == grid ? vals[0] : f(i * h);
    if (vals[i] < best) {
      best = vals[i];
      res.theta = i * h;
    }
  }
  if (best <= mu) {
    res.violated = true;
    return res;
  }
  struct Interval {
    double a, b, fa, fb;
  };
  std::vector<Interval> stack;
  for (int i = 0; i < grid; ++i) {
    if ((vals[i] + vals[i + 1]) / 2 - lipschitz * h / 2 <= 0) {
      stack.push_back({i * h, (i + 1) * h, vals[i], vals[i + 1]});
    }
  }
  std::int64_t budget = 20LL * grid;
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    const double mid = (iv.a + iv.b) / 2;
    const double fm = f(mid);
    if (fm <= mu) {
      res.violated = true;
      res.theta = mid;
      return res;
    }
    if (iv.b - iv.a < 1e-13 || --budget < 0) {
      res.inconclusive = true;
      return res;
    }
    const double half = (iv.b - iv.a) / 2;
    if ((iv.fa + fm) / 2 - lipschitz * half / 2 <= 0) stack.push_back({iv.a, mid, iv.fa, fm});
    if ((fm + iv.fb) / 2 - lipschitz * half / 2 <= 0) stack.push_back({mid, iv.b, fm, iv.fb});
  }
  return res;
}

Witness make_witness(const NullSpaceBasis& nb, const MarginFn& fn, const VectorXd& c) {
  Witness w;
  w.margin = fn(c, &w.support);
  w.v = nb.element(c);
  return w;
}

// d = 1: both directions analytically; d = 2 with a Lipschitz bound: certified
// angular search; otherwise random sampling of the sphere.
NspVerdict parametric_check(const NullSpaceBasis& nb, int s, const MarginFn& fn,
                            std::optional<double> lipschitz, const NspOptions& opt) {
  if (s < 0) throw InvalidInput("order s must be nonnegative");
  NspVerdict v;
  v.order = s;
  v.null_dim = nb.dim;
  if (nb.dim == 0 || s == 0) {
    v.note = nb.dim == 0 ? "trivial null space" : "order 0 is vacuous";
    return v;
  }
  if (nb.dim == 1) {
    for (double sign : {1.0, -1.0}) {
      const VectorXd c = VectorXd::Constant(1, sign);
      const double m = fn(c, nullptr);
      if (m <= opt.mu && (!v.witness || m < v.witness->margin)) v.witness = make_witness(nb, fn, c);
    }
    v.holds = !v.witness;
    return v;
  }
  if (nb.dim == 2 && lipschitz) {
    const auto f = [&](double th) {
      const VectorXd c = (VectorXd(2) << std::cos(th), std::sin(th)).finished();
      return fn(c, nullptr);
    };
    const AngularOutcome r = angular_search(f, *lipschitz, opt.grid_points, opt.mu);
    if (r.violated) {
      v.holds = false;
      v.witness = make_witness(nb, fn, (VectorXd(2) << std::cos(r.theta), std::sin(r.theta)).finished());
    } else if (r.inconclusive) {
      v.holds = false;
      v.method = NspMethod::kInconclusive;
      v.note = "angular search could not separate the minimum from zero";
    }
    return v;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::optional<VectorXd> best_c;
  double best = kNoViolation;
  for (int i = 0; i < opt.falsifier_samples; ++i) {
    VectorXd c(nb.dim);
    for (auto& x : c) x = gauss(rng);
    c /= c.norm();
    const double m = fn(c, nullptr);
    if (m < best) {
      best = m;
      best_c = c;
    }
  }
  if (best_c && best <= opt.mu) {
    v.holds = false;
    v.method = NspMethod::kFalsifiedOnly;
    v.witness = make_witness(nb, fn, *best_c);
  } else {
    v.method = NspMethod::kNumerical;
    v.note = "no violation among " + std::to_string(opt.falsifier_samples) + " sphere samples";
  }
  return v;
}

// ---------------------------------------------------------------------------
// Matrix margins.

std::vector<SymMatrix> blocks_of(const SymMatrix& x, const BlockPartition& p) {
  std::vector<SymMatrix> out;
  out.reserve(p.num_blocks());
  for (const auto& b : p.blocks()) out.push_back(principal_block(x, b));
  return out;
}

VectorXd eigenvalues_of(const SymMatrix& m) {
  if (m.dim() == 1) return VectorXd::Constant(1, m(0, 0));
  return symeig(m).eigenvalues;
}


double matrix_margin(const SymMatrix& v, int s, std::vector<int>* support) {
  const VectorXd lam = eigenvalues_of(v);
  return top_split_margin(abs_values(lam), std::min<int>(s, lam.size()), support);
}

// Eigenvalues descending; S = top positions; premise: the rest are <= 0.
double matrix_psd_margin(const SymMatrix& v, int s, std::vector<int>* support) {
  const VectorXd lam = eigenvalues_of(v);
  const int t = std::min<int>(s, lam.size());
  const double tol = premise_tol(lam.cwiseAbs().maxCoeff());
  for (int j = t; j < lam.size(); ++j) {
    if (lam(j) > tol) return kNoViolation;
  }
  if (support) {
    support->resize(t);
    std::iota(support->begin(), support->end(), 0);
  }
  return -lam.sum();
}

double block_matrix_margin(const SymMatrix& v, const BlockPartition& p, int s,
                           std::vector<int>* support) {
  VectorXd norms(p.num_blocks());
  const auto blks = blocks_of(v, p);
  for (int i = 0; i < p.num_blocks(); ++i) norms(i) = eigenvalues_of(blks[i]).cwiseAbs().sum();
  return top_split_margin(norms, std::min(s, p.num_blocks()), support);
}

// On the premise every admissible S gives margin -trace(V); S is completed
// from the lowest-index blocks.
double block_psd_margin(const SymMatrix& v, const BlockPartition& p, int s,
                        std::vector<int>* support) {
  const auto blks = blocks_of(v, p);
  double scale = 0.0;
  std::vector<VectorXd> lams;
  for (const auto& b : blks) {
    lams.push_back(eigenvalues_of(b));
    scale = std::max(scale, lams.back().cwiseAbs().maxCoeff());
  }
  const double tol = premise_tol(scale);
  const int t = std::min(s, p.num_blocks());
  std::vector<int> positive;
  double trace = 0.0;
  for (int i = 0; i < p.num_blocks(); ++i) {
    if (lams[i].maxCoeff() > tol) positive.push_back(i);
    trace += lams[i].sum();
  }
  if (static_cast<int>(positive.size()) > t) return kNoViolation;
  if (support) {
    *support = positive;
    for (int i = 0; i < p.num_blocks() && static_cast<int>(support->size()) < t; ++i) {
      if (std::find(positive.begin(), positive.end(), i) == positive.end()) support->push_back(i);
    }
    std::sort(support->begin(), support->end());
  }
  return -trace;
}

// Lipschitz bound for a margin built from 1-Lipschitz block norms.
double matrix_lipschitz(const NullSpaceBasis& nb, const std::optional<BlockPartition>& p) {
  double lip = 0.0;
  for (int j = 0; j < 2; ++j) {
    const SymMatrix b = nb.sym->unflatten(nb.coords.col(j));
    lip += p ? mixed_norm_star1(b, *p) : nuclear_norm(b);
  }
  return lip;
}

SymMatrix negative_semidefinite_part(const SymMatrix& m) {
  if (m.dim() == 1) {
    SymMatrix out(1);
    out.set(0, 0, std::min(m(0, 0), 0.0));
    return out;
  }
  const Spectrum sp = symeig(m);
  const VectorXd lam = sp.eigenvalues.cwiseMin(0.0);
  return SymMatrix(sp.eigenvectors * lam.asDiagonal() * sp.eigenvectors.transpose(),
                   std::numeric_limits<double>::infinity());
}

struct TraceSearch {
  double value = 0.0;
  VectorXd c;
  bool converged = false;
};

// max t^T c s.t. ||c|| <= 1, L_i c NSD for each listed block, by ADMM with
// splitting y = (c, L_1 c, ...).
TraceSearch max_trace_nsd(const std::vector<MatrixXd>& maps, const std::vector<int>& sizes,
                          const VectorXd& tvec, const AdmmConfig& cfg) {
  const auto d = tvec.size();
  Eigen::Index rows = d;
  for (const auto& l : maps) rows += l.rows();
  MatrixXd big(rows, d);
  big.topRows(d).setIdentity();
  Eigen::Index off = d;
  for (const auto& l : maps) {
    big.middleRows(off, l.rows()) = l;
    off += l.rows();
  }
  const Eigen::LDLT<MatrixXd> solver(big.transpose() * big);

  const auto project = [&](const VectorXd& w) {
    VectorXd out(rows);
    const double nrm = w.head(d).norm();
    out.head(d) = nrm > 1.0 ? VectorXd(w.head(d) / nrm) : VectorXd(w.head(d));
    Eigen::Index o = d;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const SymCoordinates coords(sizes[i]);
      const auto len = maps[i].rows();
      out.segment(o, len) = coords.flatten(negative_semidefinite_part(coords.unflatten(w.segment(o, len))));
      o += len;
    }
    return out;
  };

  double rho = cfg.rho;
  VectorXd c = VectorXd::Zero(d);
  VectorXd y = VectorXd::Zero(rows);
  VectorXd u = VectorXd::Zero(rows);
  TraceSearch res;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    c = solver.solve(tvec / rho + big.transpose() * (y - u));
    const VectorXd bc = big * c;
    const VectorXd y_prev = y;
    y = project(bc + u);
    u += bc - y;
    const double r = (bc - y).norm();
    const double s = rho * (big.transpose() * (y - y_prev)).norm();
    if (r <= cfg.tol_primal * (1.0 + std::max(bc.norm(), y.norm())) &&
        s <= cfg.tol_dual * (1.0 + rho * (big.transpose() * u).norm())) {
      res.converged = true;
      break;
    }
    if (it % 10 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }
  res.c = y.head(d);
  res.value = tvec.dot(res.c);
  return res;
}

const VectorXd& vec(const Signal& s) {
  if (const auto* v = std::get_if<VectorXd>(&s)) return *v;
  throw InvalidInput("witness holds a matrix where a vector was expected");
}

const SymMatrix& mat(const Signal& s) {
  if (const auto* v = std::get_if<SymMatrix>(&s)) return *v;
  throw InvalidInput("witness holds a vector where a matrix was expected");
}

void check_support(const std::vector<int>& support, int k) {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= k || (i > 0 && support[i] <= support[i - 1])) {
      throw InvalidInput("witness support must be sorted, distinct and in range");
    }
  }
}

// |lambda|-descending positions of the spectrum (ties in index order).
std::vector<int> abs_order(const VectorXd& lam) { return order_desc(abs_values(lam)); }

SymMatrix rank_one_sum(const Spectrum& sp, const std::vector<int>& idx, const std::function<double(double)>& f) {
  MatrixXd acc = MatrixXd::Zero(sp.eigenvectors.rows(), sp.eigenvectors.rows());
  for (int j : idx) acc += f(sp.eigenvalues(j)) * sp.eigenvectors.col(j) * sp.eigenvectors.col(j).transpose();
  return SymMatrix(acc, std::numeric_limits<double>::infinity());
}

Spectrum full_spectrum(const SymMatrix& m) {
  if (m.dim() == 1) return {VectorXd::Constant(1, m(0, 0)), MatrixXd::Identity(1, 1)};
  return symeig(m);
}

void place_block(SymMatrix& target, const std::vector<int>& idx, const SymMatrix& blk) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i; j < idx.size(); ++j) target.set(idx[i], idx[j], blk(i, j));
  }
}

}  // namespace

const char* to_string(NspMethod m) {
  switch (m) {
    case NspMethod::kExact: return "exact";
    case NspMethod::kNumerical: return "numerical";
    case NspMethod::kFalsifiedOnly: return "falsified-only";
    case NspMethod::kInconclusive: return "inconclusive";
  }
  return "?";
}

Signal NullSpaceBasis::element(const VectorXd& c) const {
  const VectorXd x = coords * c;
  if (sym) return sym->unflatten(x);
  return x;
}

std::vector<Signal> NullSpaceBasis::basis() const {
  std::vector<Signal> out;
  for (int j = 0; j < dim; ++j) out.push_back(element(VectorXd::Unit(dim, j)));
  return out;
}

NullSpaceBasis null_space_basis(const MatrixXd& a) {
  NullSpaceBasis nb;
  nb.coords = null_basis(a);
  nb.dim = static_cast<int>(nb.coords.cols());
  return nb;
}

NullSpaceBasis null_space_basis(const MatrixSensing& sensing) {
  return null_space_over(sensing, sensing.domain());
}

NullSpaceBasis null_space_basis(const Sensing& sensing) {
  if (const auto* a = std::get_if<MatrixXd>(&sensing)) return null_space_basis(*a);
  return null_space_basis(std::get<MatrixSensing>(sensing));
}

NspVerdict check_nsp_classical(const MatrixXd& a, int s, const NspOptions& opt) {
  return vector_lp_check(a, BlockPartition::Singletons(static_cast<int>(a.cols())), s, false, opt);
}

NspVerdict check_nsp_nonneg(const MatrixXd& a, int s, const NspOptions& opt) {
  return vector_lp_check(a, BlockPartition::Singletons(static_cast<int>(a.cols())), s, true, opt);
}

NspVerdict check_nsp_block_nonneg(const MatrixXd& a, const BlockPartition& partition, int s,
                                  const NspOptions& opt) {
  return vector_lp_check(a, partition, s, true, opt);
}

NspVerdict check_nsp_block(const MatrixXd& a, const BlockPartition& partition, int s, NormIndex q,
                           const NspOptions& opt) {
  if (q == NormIndex::kOne) return vector_lp_check(a, partition, s, false, opt);
  if (partition.dim() != a.cols()) throw InvalidInput("partition/dimension mismatch");
  const NullSpaceBasis nb = null_space_basis(a);
  const MarginFn fn = [&](const VectorXd& c, std::vector<int>* support) {
    const VectorXd v = nb.coords * c;
    return top_split_margin(block_norms(v, partition, q), std::min(s, partition.num_blocks()), support);
  };
  std::optional<double> lip;
  if (nb.dim == 2) {
    lip = mixed_norm_q1(nb.coords.col(0), partition, q) + mixed_norm_q1(nb.coords.col(1), partition, q);
  }
  return parametric_check(nb, s, fn, lip, opt);
}

NspVerdict check_nsp_matrix(const MatrixSensing& sensing, int s, const NspOptions& opt) {
  const NullSpaceBasis nb = null_space_over(sensing, SymCoordinates(sensing.n()));
  // S is reported as positions in |lambda|-descending order, so the worst
  // subset is always the leading t positions.
  const MarginFn fn = [&](const VectorXd& c, std::vector<int>* support) {
    const SymMatrix v = nb.sym->unflatten(nb.coords * c);
    const double m = matrix_margin(v, s, nullptr);
    if (support) {
      support->resize(std::min<int>(s, v.dim()));
      std::iota(support->begin(), support->end(), 0);
    }
    return m;
  };
  std::optional<double> lip;
  if (nb.dim == 2) lip = matrix_lipschitz(nb, std::nullopt);
  return parametric_check(nb, s, fn, lip, opt);
}

NspVerdict check_nsp_matrix_psd(const MatrixSensing& sensing, int s, const NspOptions& opt) {
  const NullSpaceBasis nb = null_space_over(sensing, SymCoordinates(sensing.n()));
  const MarginFn fn = [&](const VectorXd& c, std::vector<int>* support) {
    return matrix_psd_margin(nb.sym->unflatten(nb.coords * c), s, support);
  };
  return parametric_check(nb, s, fn, std::nullopt, opt);
}

NspVerdict check_nsp_block_matrix(const MatrixSensing& sensing, const BlockPartition& partition,
                                  int s, const NspOptions& opt) {
  if (partition.dim() != sensing.n()) throw InvalidInput("partition/dimension mismatch");
  if (!is_block_diagonal(sensing.mats(), partition)) {
    throw InvalidInput("sensing is not in block-diagonal form for the partition");
  }
  const NullSpaceBasis nb = null_space_over(sensing, SymCoordinates(partition));
  const MarginFn fn = [&](const VectorXd& c, std::vector<int>* support) {
    return block_matrix_margin(nb.sym->unflatten(nb.coords * c), partition, s, support);
  };
  std::optional<double> lip;
  if (nb.dim == 2) lip = matrix_lipschitz(nb, partition);
  return parametric_check(nb, s, fn, lip, opt);
}

NspVerdict check_nsp_block_matrix_psd(const MatrixSensing& sensing,
                                      const BlockPartition& partition, int s,
                                      const NspOptions& opt) {
  if (partition.dim() != sensing.n()) throw InvalidInput("partition/dimension mismatch");
  if (!is_block_diagonal(sensing.mats(), partition)) {
    throw InvalidInput("sensing is not in block-diagonal form for the partition");
  }
  const NullSpaceBasis nb = null_space_over(sensing, SymCoordinates(partition));
  const MarginFn fn = [&](const VectorXd& c, std::vector<int>* support) {
    return block_psd_margin(nb.sym->unflatten(nb.coords * c), partition, s, support);
  };
  NspVerdict v = parametric_check(nb, s, fn, std::nullopt, opt);
  if (nb.dim < 2 || s == 0 || v.method != NspMethod::kNumerical) return v;

  // Per-S trace maximization over {V in N : V_Bi NSD for i outside S}.
  const int k = partition.num_blocks();
  const int t = std::min(s, k);
  guard_subsets(k, t, opt);
  std::vector<SymMatrix> basis;
  VectorXd tvec(nb.dim);
  for (int j = 0; j < nb.dim; ++j) {
    basis.push_back(nb.sym->unflatten(nb.coords.col(j)));
    tvec(j) = basis.back().trace();
  }
  bool unconverged = false;
  for_each_combination(k, t, [&](const std::vector<int>& blocks) {
    ++v.subsets_checked;
    std::vector<MatrixXd> maps;
    std::vector<int> sizes;
    for (int i : complement(blocks, k)) {
      const auto& idx = partition.block(i);
      const SymCoordinates coords(static_cast<int>(idx.size()));
      MatrixXd l(coords.size(), nb.dim);
      for (int j = 0; j < nb.dim; ++j) l.col(j) = coords.flatten(principal_block(basis[j], idx));
      maps.push_back(std::move(l));
      sizes.push_back(static_cast<int>(idx.size()));
    }
    const TraceSearch r = max_trace_nsd(maps, sizes, tvec, opt.admm);
    unconverged |= !r.converged;
    if (r.converged && r.value > 1e-6) {
      Witness w;
      w.v = nb.element(r.c);
      w.support = blocks;
      w.margin = -mat(w.v).trace();
      v.witness = w;
      v.holds = false;
      v.note = "trace maximization found a violating null-space element";
      return false;
    }
    return true;
  });
  if (v.holds) {
    v.note = unconverged ? "trace maximization did not converge on every subset"
                         : "trace maximization found no violation";
    if (unconverged) {
      v.holds = false;
      v.method = NspMethod::kInconclusive;
    }
  }
  return v;
}

NspVerdict check_nsp(const Setting& setting, const Sensing& sensing, int s, const NspOptions& opt) {
  setting.validate();
  const auto need_vector = [&]() -> const MatrixXd& {
    if (const auto* a = std::get_if<MatrixXd>(&sensing)) return *a;
    throw InvalidInput("vector setting requires a matrix A");
  };
  const auto need_matrix = [&]() -> const MatrixSensing& {
    if (const auto* a = std::get_if<MatrixSensing>(&sensing)) return *a;
    throw InvalidInput("matrix setting requires a matrix sensing operator");
  };
  switch (setting.tag) {
    case SettingTag::kL1: return check_nsp_classical(need_vector(), s, opt);
    case SettingTag::kL1Nonneg: return check_nsp_nonneg(need_vector(), s, opt);
    case SettingTag::kBlockQ1: return check_nsp_block(need_vector(), *setting.partition, s, setting.q, opt);
    case SettingTag::kBlockNonneg: return check_nsp_block_nonneg(need_vector(), *setting.partition, s, opt);
    case SettingTag::kNuclear: return check_nsp_matrix(need_matrix(), s, opt);
    case SettingTag::kNuclearPsd: return check_nsp_matrix_psd(need_matrix(), s, opt);
    case SettingTag::kBlockNuclear: return check_nsp_block_matrix(need_matrix(), *setting.partition, s, opt);
    case SettingTag::kBlockNuclearPsd:
      return check_nsp_block_matrix_psd(need_matrix(), *setting.partition, s, opt);
  }
  throw InvalidInput("unknown setting");
}

double evaluate_witness(const Setting& setting, const Witness& w) {
  setting.validate();
  const auto sup = w.support;
  switch (setting.tag) {
    case SettingTag::kL1:
    case SettingTag::kL1Nonneg:
    case SettingTag::kBlockQ1:
    case SettingTag::kBlockNonneg: {
      const VectorXd& v = vec(w.v);
      const BlockPartition p = setting.partition ? *setting.partition
                                                 : BlockPartition::Singletons(static_cast<int>(v.size()));
      if (p.dim() != v.size()) throw InvalidInput("witness/partition dimension mismatch");
      check_support(sup, p.num_blocks());
      const std::vector<int> in = block_union(p, sup);
      const std::vector<int> out = complement(in, p.dim());
      if (setting.tag == SettingTag::kL1Nonneg || setting.tag == SettingTag::kBlockNonneg) {
        return nonneg_margin(v, in, out);
      }
      const VectorXd norms = block_norms(v, p, setting.q);
      double m = norms.sum();
      for (int i : sup) m -= 2 * norms(i);
      return m;
    }
    case SettingTag::kNuclear: {
      const VectorXd lam = eigenvalues_of(mat(w.v));
      check_support(sup, static_cast<int>(lam.size()));
      const std::vector<int> ord = abs_order(lam);
      double m = lam.cwiseAbs().sum();
      for (int r : sup) m -= 2 * std::abs(lam(ord[r]));
      return m;
    }
    case SettingTag::kNuclearPsd: {
      const VectorXd lam = eigenvalues_of(mat(w.v));
      check_support(sup, static_cast<int>(lam.size()));
      const double tol = premise_tol(lam.cwiseAbs().maxCoeff());
      double m = 0.0;
      for (int j = 0; j < lam.size(); ++j) {
        const bool in = std::binary_search(sup.begin(), sup.end(), j);
        if (!in && lam(j) > tol) return kNoViolation;
        m += in ? -lam(j) : std::abs(lam(j));
      }
      return m;
    }
    case SettingTag::kBlockNuclear:
    case SettingTag::kBlockNuclearPsd: {
      const BlockPartition& p = *setting.partition;
      const SymMatrix& v = mat(w.v);
      if (p.dim() != v.dim()) throw InvalidInput("witness/partition dimension mismatch");
      check_support(sup, p.num_blocks());
      const auto blks = blocks_of(v, p);
      double scale = 0.0;
      for (const auto& b : blks) scale = std::max(scale, eigenvalues_of(b).cwiseAbs().maxCoeff());
      const double tol = premise_tol(scale);
      const bool psd = setting.tag == SettingTag::kBlockNuclearPsd;
      double m = 0.0;
      for (int i = 0; i < p.num_blocks(); ++i) {
        const VectorXd lam = eigenvalues_of(blks[i]);
        const bool in = std::binary_search(sup.begin(), sup.end(), i);
        if (in) {
          m -= psd ? lam.sum() : lam.cwiseAbs().sum();
        } else {
          if (psd && lam.maxCoeff() > tol) return kNoViolation;
          m += lam.cwiseAbs().sum();
        }
      }
      return m;
    }
  }
  return kNoViolation;
}

std::pair<Signal, Signal> witness_to_counterexample(const Setting& setting, const NspVerdict& v) {
  if (v.holds || !v.witness) throw InvalidInput("witness_to_counterexample needs a failed verdict with a witness");
  return witness_to_counterexample(setting, *v.witness);
}

std::pair<Signal, Signal> witness_to_counterexample(const Setting& setting, const Witness& w) {
  setting.validate();
  const auto& sup = w.support;
  switch (setting.tag) {
    case SettingTag::kL1:
    case SettingTag::kBlockQ1:
    case SettingTag::kL1Nonneg:
    case SettingTag::kBlockNonneg: {
      const VectorXd& v = vec(w.v);
      const BlockPartition p = setting.partition ? *setting.partition
                                                 : BlockPartition::Singletons(static_cast<int>(v.size()));
      check_support(sup, p.num_blocks());
      const std::vector<int> in = block_union(p, sup);
      VectorXd x0 = VectorXd::Zero(v.size());
      VectorXd z = -v;
      for (int j : in) {
        x0(j) = v(j);
        z(j) = 0.0;
      }
      if (setting.has_cone()) {
        // x0 = v_S^+, z = v_S^- - v_Sbar.
        for (int j : in) {
          x0(j) = std::max(v(j), 0.0);
          z(j) = std::max(-v(j), 0.0);
        }
        z = z.cwiseMax(0.0);
      }
      return {Signal(x0), Signal(z)};
    }
    case SettingTag::kNuclear: {
      const SymMatrix& v = mat(w.v);
      const Spectrum sp = full_spectrum(v);
      check_support(sup, static_cast<int>(v.dim()));
      const std::vector<int> ord = abs_order(sp.eigenvalues);
      std::vector<int> in, out;
      for (int r = 0; r < v.dim(); ++r) {
        (std::binary_search(sup.begin(), sup.end(), r) ? in : out).push_back(ord[r]);
      }
      return {Signal(rank_one_sum(sp, in, [](double l) { return l; })),
              Signal(rank_one_sum(sp, out, [](double l) { return -l; }))};
    }
    case SettingTag::kNuclearPsd: {
      const SymMatrix& v = mat(w.v);
      const Spectrum sp = full_spectrum(v);
      check_support(sup, static_cast<int>(v.dim()));
      const std::vector<int> in = sup;
      const std::vector<int> out = complement(sup, static_cast<int>(v.dim()));
      SymMatrix x0 = rank_one_sum(sp, in, [](double l) { return std::max(l, 0.0); });
      SymMatrix z = rank_one_sum(sp, in, [](double l) { return std::max(-l, 0.0); }) +
                    rank_one_sum(sp, out, [](double l) { return std::max(-l, 0.0); });
      return {Signal(x0), Signal(z)};
    }
    case SettingTag::kBlockNuclear:
    case SettingTag::kBlockNuclearPsd: {
      const BlockPartition& p = *setting.partition;
      const SymMatrix& v = mat(w.v);
      check_support(sup, p.num_blocks());
      SymMatrix x0(v.dim()), z(v.dim());
      const bool psd = setting.tag == SettingTag::kBlockNuclearPsd;
      for (int i = 0; i < p.num_blocks(); ++i) {
        const auto& idx = p.block(i);
        const SymMatrix b = principal_block(v, idx);
        const bool in = std::binary_search(sup.begin(), sup.end(), i);
        if (!psd) {
          place_block(in ? x0 : z, idx, in ? b : -b);
          continue;
        }
        const Spectrum sp = full_spectrum(b);
        std::vector<int> all(idx.size());
        std::iota(all.begin(), all.end(), 0);
        if (in) {
          place_block(x0, idx, rank_one_sum(sp, all, [](double l) { return std::max(l, 0.0); }));
          place_block(z, idx, rank_one_sum(sp, all, [](double l) { return std::max(-l, 0.0); }));
        } else {
          place_block(z, idx, rank_one_sum(sp, all, [](double l) { return std::max(-l, 0.0); }));
        }
      }
      return {Signal(x0), Signal(z)};
    }
  }
  throw InvalidInput("unknown setting");
}

MatrixSensing diagonal_embedding(const MatrixXd& a, const std::optional<BlockPartition>& partition) {
  const int n = static_cast<int>(a.cols());
  if (partition && partition->dim() != n) throw InvalidInput("partition/dimension mismatch");
  std::vector<SymMatrix> mats;
  for (int p = 0; p < a.rows(); ++p) mats.push_back(SymMatrix::Diagonal(a.row(p).transpose()));
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      if (partition && partition->block_of(j) != partition->block_of(k)) continue;
      SymMatrix pin(n);
      pin.set(j, k, 1.0);
      mats.push_back(pin);
    }
  }
  return MatrixSensing(std::move(mats), partition);
}

SymMatrix canonical_direction(const SymMatrix& v) {
  const VectorXd lam = eigenvalues_of(v).cwiseAbs();
  const double big = lam.maxCoeff();
  if (big == 0.0) throw InvalidInput("canonical_direction: zero matrix");
  double small = big;
  for (auto x : lam) {
    if (x > 1e-9 * big) small = std::min(small, x);
  }
  double sign = 0.0;
  for (int i = 0; i < v.dim() && sign == 0.0; ++i) {
    if (std::abs(v(i, i)) > 1e-9 * big) sign = v(i, i) > 0 ? 1.0 : -1.0;
  }
  for (int i = 0; i < v.dim() && sign == 0.0; ++i) {
    for (int j = i + 1; j < v.dim() && sign == 0.0; ++j) {
      if (std::abs(v(i, j)) > 1e-9 * big) sign = v(i, j) > 0 ? 1.0 : -1.0;
    }
  }
  return v * (sign / small);
}

ImplicationTable block_psd_implication_table(const MatrixSensing& sensing,
                                             const BlockPartition& partition, int s) {
  if (partition.dim() != sensing.n()) throw InvalidInput("partition/dimension mismatch");
  const NullSpaceBasis nb = null_space_over(sensing, SymCoordinates(partition));
  if (nb.dim != 1) throw InvalidInput("implication table needs a one-dimensional null space");
  ImplicationTable table;
  table.direction = canonical_direction(mat(nb.element(VectorXd::Ones(1))));
  const auto blks = blocks_of(table.direction, partition);
  const int k = partition.num_blocks();
  for (int size = 0; size <= std::min(s, k); ++size) {
    for_each_combination(k, size, [&](const std::vector<int>& sup) {
      ImplicationRow row;
      row.support = sup;
      row.premise_positive = row.premise_negative = true;
      for (int i = 0; i < k; ++i) {
        const VectorXd lam = eigenvalues_of(blks[i]);
        if (std::binary_search(sup.begin(), sup.end(), i)) {
          row.lhs += lam.sum();
        } else {
          row.rhs += lam.cwiseAbs().sum();
          row.premise_positive &= lam.maxCoeff() <= 1e-12;
          row.premise_negative &= lam.minCoeff() >= -1e-12;
        }
      }
      row.satisfied = (!row.premise_positive || row.lhs < row.rhs) &&
                      (!row.premise_negative || -row.lhs < row.rhs);
      table.rows.push_back(row);
      return true;
    });
  }
  return table;
}

}  // namespace nsplab
