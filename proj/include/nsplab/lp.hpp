#pragma once

#include "nsplab/linalg.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace nsplab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpSense { kMinimize, kMaximize };

/// optimize c^T x  s.t.  a_eq x = b_eq,  lower <= x <= upper.
/// Infinite bounds mean "no bound".
struct LpProblem {
  VectorXd c;
  MatrixXd a_eq;
  VectorXd b_eq;
  VectorXd lower;
  VectorXd upper;
  LpSense sense = LpSense::kMinimize;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  double objective = 0.0;
  VectorXd point;
  int iterations = 0;
};

/// Dense two-phase primal simplex with Bland's rule. Free variables are split
/// into nonnegative pairs and finite upper bounds become slack rows. The
/// pivot tolerance is 1e-10 and the iteration cap 50 * (variables + rows) of
/// the standard-form problem; hitting the cap reports kNumericalFailure.
LpSolution solve_lp(const LpProblem& problem);

/// Incremental construction of an LpProblem from sparse rows. Inequality rows
/// get their own slack variable.
class LpBuilder {
 public:
  using Row = std::vector<std::pair<int, double>>;

  int add_variable(double lower, double upper, double cost = 0.0);
  /// Adds `count` variables with identical bounds; returns the first index.
  int add_variables(int count, double lower, double upper, double cost = 0.0);
  void set_cost(int var, double cost);

  void add_equal(const Row& row, double rhs);
  void add_less_equal(const Row& row, double rhs);
  void add_greater_equal(const Row& row, double rhs);

  int num_variables() const { return static_cast<int>(lower_.size()); }
  LpProblem build(LpSense sense) const;

 private:
  std::vector<double> lower_, upper_, cost_;
  std::vector<Row> rows_;
  std::vector<double> rhs_;
};

}  // namespace nsplab
