#include "nsplab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsplab {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-10;
constexpr double kFeasTol = 1e-9;

// How an original variable maps onto standard-form columns.
struct VarMap {
  enum Kind { kShiftLower, kFlipUpper, kFree } kind;
  int col = -1;       // y column
  int neg_col = -1;   // second column for free variables
  double offset = 0;  // x = offset + y  or  x = offset - y
};

// Standard form: minimize c^T y, A y = b, y >= 0.
class Tableau {
 public:
  Tableau(const MatrixXd& a, const VectorXd& b, const VectorXd& c, int iteration_cap)
      : rows_(static_cast<int>(a.rows())), cols_(static_cast<int>(a.cols())),
        rhs_col_(cols_ + rows_), cost_(c), cap_(iteration_cap) {
    // Columns: [structural | artificial | rhs]; last row holds reduced costs.
    t_ = MatrixXd::Zero(rows_ + 1, cols_ + rows_ + 1);
    for (int i = 0; i < rows_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(cols_) = sign * a.row(i);
      t_(i, cols_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
    }
    basis_.resize(rows_);
    for (int i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
  }

  LpStatus run(VectorXd* y, double* objective, int* iterations) {
    // Phase 1: minimize the sum of artificials.
    t_.row(rows_).setZero();
    for (int j = cols_; j < cols_ + rows_; ++j) t_(rows_, j) = 1.0;
    for (int i = 0; i < rows_; ++i) t_.row(rows_) -= t_.row(i);
    LpStatus st = iterate(cols_ + rows_);
    if (st == LpStatus::kNumericalFailure) return finish(st, iterations);
    const double bnorm = rows_ ? t_.col(rhs()).head(rows_).cwiseAbs().maxCoeff() : 0.0;
    if (-t_(rows_, rhs()) > kFeasTol * (1.0 + bnorm)) return finish(LpStatus::kInfeasible, iterations);

    drive_out_artificials();

    // Phase 2 objective row: c_j - c_B^T B^{-1} A_j.
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = cost_.transpose();
    for (int i = 0; i < rows_; ++i) {
      const int bv = basis_[i];
      const double cb = bv < cols_ ? cost_(bv) : 0.0;
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
    st = iterate(cols_);
    if (st != LpStatus::kOptimal) return finish(st, iterations);

    y->setZero(cols_);
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) (*y)(basis_[i]) = std::max(0.0, t_(i, rhs()));
    }
    *objective = cost_.dot(*y);
    return finish(LpStatus::kOptimal, iterations);
  }

 private:
  int rhs() const { return rhs_col_; }

  LpStatus finish(LpStatus st, int* iterations) const {
    *iterations = iter_;
    return st;
  }

  // Bland's rule: lowest-index improving column, ratio ties broken by the
  // lowest basic variable index.
  LpStatus iterate(int eligible_cols) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < eligible_cols; ++j) {
        if (t_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < rows_; ++i) {
        const double aij = t_(i, enter);
        if (aij <= kPivotTol) continue;
        const double ratio = t_(i, rhs()) / aij;
        const double tie = 1e-12 * (1.0 + std::abs(best));
        if (leave < 0 || ratio < best - tie) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + tie && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      if (++iter_ > cap_) return LpStatus::kNumericalFailure;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Pivot basic artificials (at zero level) out of the basis; rows where no
  // structural pivot exists are redundant and get dropped.
  void drive_out_artificials() {
    std::vector<int> keep;
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) {
        keep.push_back(i);
        continue;
      }
      int col = -1;
      double best = kPivotTol;
      for (int j = 0; j < cols_; ++j) {
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
        keep.push_back(i);
      }
    }
    if (static_cast<int>(keep.size()) == rows_) return;
    MatrixXd nt(keep.size() + 1, t_.cols());
    std::vector<int> nb;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      nt.row(k) = t_.row(keep[k]);
      nb.push_back(basis_[keep[k]]);
    }
    nt.row(keep.size()) = t_.row(rows_);
    // Artificial columns of dropped rows stay in the tableau but can no
    // longer enter (phase 2 only scans structural columns).
    t_ = std::move(nt);
    basis_ = std::move(nb);
    rows_ = static_cast<int>(keep.size());
  }

  int rows_;
  int cols_;
  int rhs_col_;
  VectorXd cost_;
  int cap_;
  int iter_ = 0;
  MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

LpSolution solve_lp(const LpProblem& p) {
  const auto d = static_cast<int>(p.c.size());
  const auto m = static_cast<int>(p.a_eq.rows());
  if (p.a_eq.cols() != d && !(m == 0)) throw InvalidInput("solve_lp: a_eq column count != len(c)");
  if (p.b_eq.size() != m) throw InvalidInput("solve_lp: len(b_eq) != rows of a_eq");
  if (p.lower.size() != d || p.upper.size() != d) throw InvalidInput("solve_lp: bound length mismatch");
  for (int j = 0; j < d; ++j) {
    if (p.lower(j) > p.upper(j)) {
      throw InvalidInput("solve_lp: lower bound exceeds upper bound for variable " + std::to_string(j));
    }
    if (std::isnan(p.lower(j)) || std::isnan(p.upper(j)) || std::isnan(p.c(j))) {
      throw InvalidInput("solve_lp: NaN in problem data");
    }
  }

  // Map variables to y >= 0 columns.
  std::vector<VarMap> maps(d);
  int ncols = 0;
  std::vector<std::pair<int, double>> ub_rows;  // (y column, bound) for y <= bound
  for (int j = 0; j < d; ++j) {
    const double lo = p.lower(j);
    const double hi = p.upper(j);
    if (std::isfinite(lo)) {
      maps[j] = {VarMap::kShiftLower, ncols++, -1, lo};
      if (std::isfinite(hi)) ub_rows.emplace_back(maps[j].col, hi - lo);
    } else if (std::isfinite(hi)) {
      maps[j] = {VarMap::kFlipUpper, ncols++, -1, hi};
    } else {
      maps[j] = {VarMap::kFree, ncols, ncols + 1, 0.0};
      ncols += 2;
    }
  }
  const int nslack = static_cast<int>(ub_rows.size());
  const int total_cols = ncols + nslack;
  const int total_rows = m + nslack;

  MatrixXd a = MatrixXd::Zero(total_rows, total_cols);
  VectorXd b = VectorXd::Zero(total_rows);
  VectorXd c = VectorXd::Zero(total_cols);
  const double sense = p.sense == LpSense::kMaximize ? -1.0 : 1.0;
  for (int j = 0; j < d; ++j) {
    const VarMap& vm = maps[j];
    const double cj = sense * p.c(j);
    switch (vm.kind) {
      case VarMap::kShiftLower:
        c(vm.col) = cj;
        break;
      case VarMap::kFlipUpper:
        c(vm.col) = -cj;
        break;
      case VarMap::kFree:
        c(vm.col) = cj;
        c(vm.neg_col) = -cj;
        break;
    }
  }
  for (int i = 0; i < m; ++i) {
    double rhs = p.b_eq(i);
    for (int j = 0; j < d; ++j) {
      const double aij = p.a_eq(i, j);
      if (aij == 0.0) continue;
      const VarMap& vm = maps[j];
      switch (vm.kind) {
        case VarMap::kShiftLower:
          a(i, vm.col) = aij;
          rhs -= aij * vm.offset;
          break;
        case VarMap::kFlipUpper:
          a(i, vm.col) = -aij;
          rhs -= aij * vm.offset;
          break;
        case VarMap::kFree:
          a(i, vm.col) = aij;
          a(i, vm.neg_col) = -aij;
          break;
      }
    }
    b(i) = rhs;
  }
  for (int k = 0; k < nslack; ++k) {
    a(m + k, ub_rows[k].first) = 1.0;
    a(m + k, ncols + k) = 1.0;
    b(m + k) = ub_rows[k].second;
  }

  Tableau tableau(a, b, c, 50 * (total_cols + total_rows) + 50);
  VectorXd y;
  double obj = 0.0;
  LpSolution sol;
  sol.status = tableau.run(&y, &obj, &sol.iterations);
  if (sol.status != LpStatus::kOptimal) return sol;

  sol.point.resize(d);
  for (int j = 0; j < d; ++j) {
    const VarMap& vm = maps[j];
    switch (vm.kind) {
      case VarMap::kShiftLower: sol.point(j) = vm.offset + y(vm.col); break;
      case VarMap::kFlipUpper: sol.point(j) = vm.offset - y(vm.col); break;
      case VarMap::kFree: sol.point(j) = y(vm.col) - y(vm.neg_col); break;
    }
  }
  sol.objective = p.c.dot(sol.point);
  return sol;
}

// ---------------------------------------------------------------------------
// LpBuilder

int LpBuilder::add_variable(double lower, double upper, double cost) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return num_variables() - 1;
}

int LpBuilder::add_variables(int count, double lower, double upper, double cost) {
  const int first = num_variables();
  for (int i = 0; i < count; ++i) add_variable(lower, upper, cost);
  return first;
}

void LpBuilder::set_cost(int var, double cost) { cost_.at(var) = cost; }

void LpBuilder::add_equal(const Row& row, double rhs) {
  rows_.push_back(row);
  rhs_.push_back(rhs);
}

void LpBuilder::add_less_equal(const Row& row, double rhs) {
  Row r = row;
  r.emplace_back(add_variable(0.0, kInf), 1.0);
  add_equal(r, rhs);
}

void LpBuilder::add_greater_equal(const Row& row, double rhs) {
  Row r = row;
  r.emplace_back(add_variable(0.0, kInf), -1.0);
  add_equal(r, rhs);
}

LpProblem LpBuilder::build(LpSense sense) const {
  const int d = num_variables();
  LpProblem p;
  p.sense = sense;
  p.c = Eigen::Map<const VectorXd>(cost_.data(), d);
  p.lower = Eigen::Map<const VectorXd>(lower_.data(), d);
  p.upper = Eigen::Map<const VectorXd>(upper_.data(), d);
  p.a_eq = MatrixXd::Zero(static_cast<Eigen::Index>(rows_.size()), d);
  p.b_eq = Eigen::Map<const VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& [var, coef] : rows_[i]) p.a_eq(static_cast<Eigen::Index>(i), var) += coef;
  }
  return p;
}

}  // namespace nsplab
