#include "nsplab/recovery.hpp"

#include "nsplab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace nsplab {

const char* to_string(SettingTag tag) {
  switch (tag) {
    case SettingTag::kL1: return "l1";
    case SettingTag::kL1Nonneg: return "l1-nonneg";
    case SettingTag::kBlockQ1: return "block-q1";
    case SettingTag::kBlockNonneg: return "block-nonneg";
    case SettingTag::kNuclear: return "nuclear";
    case SettingTag::kNuclearPsd: return "nuclear-psd";
    case SettingTag::kBlockNuclear: return "block-nuclear";
    case SettingTag::kBlockNuclearPsd: return "block-nuclear-psd";
  }
  return "?";
}

SettingTag parse_setting_tag(std::string_view name) {
  for (auto tag : {SettingTag::kL1, SettingTag::kL1Nonneg, SettingTag::kBlockQ1,
                   SettingTag::kBlockNonneg, SettingTag::kNuclear, SettingTag::kNuclearPsd,
                   SettingTag::kBlockNuclear, SettingTag::kBlockNuclearPsd}) {
    if (name == to_string(tag)) return tag;
  }
  throw InvalidInput("unknown setting '" + std::string(name) + "'");
}

const char* to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::kUnique: return "unique";
    case Uniqueness::kNonUnique: return "non-unique";
    case Uniqueness::kUndetermined: return "undetermined";
  }
  return "?";
}

const char* to_string(RecoveryVerdict v) {
  switch (v) {
    case RecoveryVerdict::kRecoveredUnique: return "recovered-unique";
    case RecoveryVerdict::kNotRecovered: return "not-recovered";
    case RecoveryVerdict::kUndetermined: return "undetermined";
  }
  return "?";
}

bool Setting::is_matrix() const {
  return tag == SettingTag::kNuclear || tag == SettingTag::kNuclearPsd ||
         tag == SettingTag::kBlockNuclear || tag == SettingTag::kBlockNuclearPsd;
}

bool Setting::is_block() const {
  return tag == SettingTag::kBlockQ1 || tag == SettingTag::kBlockNonneg ||
         tag == SettingTag::kBlockNuclear || tag == SettingTag::kBlockNuclearPsd;
}

bool Setting::has_cone() const {
  return tag == SettingTag::kL1Nonneg || tag == SettingTag::kBlockNonneg ||
         tag == SettingTag::kNuclearPsd || tag == SettingTag::kBlockNuclearPsd;
}

void Setting::validate() const {
  if (is_block() != partition.has_value()) {
    throw InvalidInput(std::string("setting ") + to_string(tag) +
                       (is_block() ? " requires a partition" : " takes no partition"));
  }
  if (tag != SettingTag::kBlockQ1 && q != NormIndex::kOne) {
    throw InvalidInput(std::string("setting ") + to_string(tag) + " takes no q");
  }
}

namespace {

const MatrixXd& vector_sensing(const Sensing& sensing) {
  if (const auto* a = std::get_if<MatrixXd>(&sensing)) return *a;
  throw InvalidInput("vector setting requires a matrix A, got a matrix sensing operator");
}

const MatrixSensing& matrix_sensing(const Sensing& sensing) {
  if (const auto* a = std::get_if<MatrixSensing>(&sensing)) return *a;
  throw InvalidInput("matrix setting requires a matrix sensing operator, got a matrix A");
}

const VectorXd& as_vector(const Signal& x) {
  if (const auto* v = std::get_if<VectorXd>(&x)) return *v;
  throw InvalidInput("expected a vector signal");
}

const SymMatrix& as_matrix(const Signal& x) {
  if (const auto* v = std::get_if<SymMatrix>(&x)) return *v;
  throw InvalidInput("expected a symmetric matrix signal");
}

// Signal kind, sensing kind and partition dimension must agree.
void check_compatible(const Setting& setting, const Sensing& sensing) {
  setting.validate();
  if (setting.is_matrix()) {
    const auto& ms = matrix_sensing(sensing);
    if (setting.partition) {
      if (setting.partition->dim() != ms.n()) throw InvalidInput("partition/dimension mismatch");
      if (!is_block_diagonal(ms.mats(), *setting.partition)) {
        throw InvalidInput("sensing is not in block-diagonal form for the partition");
      }
    }
  } else {
    const auto& a = vector_sensing(sensing);
    if (setting.partition && setting.partition->dim() != a.cols()) {
      throw InvalidInput("partition/dimension mismatch");
    }
  }
}

struct SolveOutcome {
  Signal signal;
  double objective = 0.0;
  double residual = 0.0;
  bool lp = true;
  int iterations = 0;
  bool converged = true;
};

[[noreturn]] void lp_failed(const LpSolution& sol) {
  throw NumericalFailure(std::string("recovery LP ended with status ") + to_string(sol.status));
}

// min sum |x_j| (+ g.x), optionally x >= 0, via x = x+ - x-.
VectorXd solve_l1_lp(const MatrixXd& a, const VectorXd& b, bool nonneg, const VectorXd* g, int* iters) {
  const int n = static_cast<int>(a.cols());
  LpBuilder lp;
  const int plus = lp.add_variables(n, 0.0, kInf, 1.0);
  const int minus = nonneg ? -1 : lp.add_variables(n, 0.0, kInf, 1.0);
  if (g) {
    for (int j = 0; j < n; ++j) {
      lp.set_cost(plus + j, 1.0 + (*g)(j));
      if (!nonneg) lp.set_cost(minus + j, 1.0 - (*g)(j));
    }
  }
  for (int r = 0; r < a.rows(); ++r) {
    LpBuilder::Row row;
    for (int j = 0; j < n; ++j) {
      if (a(r, j) == 0.0) continue;
      row.emplace_back(plus + j, a(r, j));
      if (!nonneg) row.emplace_back(minus + j, -a(r, j));
    }
    lp.add_equal(row, b(r));
  }
  const LpSolution sol = solve_lp(lp.build(LpSense::kMinimize));
  if (sol.status != LpStatus::kOptimal) lp_failed(sol);
  *iters = sol.iterations;
  VectorXd x(n);
  for (int j = 0; j < n; ++j) x(j) = sol.point(plus + j) - (nonneg ? 0.0 : sol.point(minus + j));
  return x;
}

// min sum_i ||x[i]||_inf (+ g.x) with one bound variable per block.
VectorXd solve_linf1_lp(const MatrixXd& a, const VectorXd& b, const BlockPartition& p,
                        const VectorXd* g, int* iters) {
  const int n = static_cast<int>(a.cols());
  LpBuilder lp;
  const int x0 = lp.add_variables(n, -kInf, kInf, 0.0);
  if (g) {
    for (int j = 0; j < n; ++j) lp.set_cost(x0 + j, (*g)(j));
  }
  const int t0 = lp.add_variables(p.num_blocks(), 0.0, kInf, 1.0);
  for (int i = 0; i < p.num_blocks(); ++i) {
    for (int j : p.block(i)) {
      lp.add_less_equal({{x0 + j, 1.0}, {t0 + i, -1.0}}, 0.0);
      lp.add_less_equal({{x0 + j, -1.0}, {t0 + i, -1.0}}, 0.0);
    }
  }
  for (int r = 0; r < a.rows(); ++r) {
    LpBuilder::Row row;
    for (int j = 0; j < n; ++j) {
      if (a(r, j) != 0.0) row.emplace_back(x0 + j, a(r, j));
    }
    lp.add_equal(row, b(r));
  }
  const LpSolution sol = solve_lp(lp.build(LpSense::kMinimize));
  if (sol.status != LpStatus::kOptimal) lp_failed(sol);
  *iters = sol.iterations;
  return sol.point.head(n);
}

SolveOutcome solve_once(const Setting& setting, const Sensing& sensing, const VectorXd& b,
                        const AdmmConfig& cfg, const Signal* linear_term) {
  SolveOutcome out;
  if (setting.is_matrix()) {
    const auto& ms = matrix_sensing(sensing);
    const bool psd = setting.has_cone();
    std::optional<SymMatrix> g;
    if (linear_term) g = as_matrix(*linear_term);
    const MatrixSolveResult r = min_nuclear(ms, b, psd, setting.partition, cfg, g);
    out.signal = r.x;
    out.lp = false;
    out.iterations = r.diagnostics.iterations;
    out.converged = r.diagnostics.converged;
  } else {
    const MatrixXd& a = vector_sensing(sensing);
    const VectorXd* g = linear_term ? &as_vector(*linear_term) : nullptr;
    VectorXd x;
    switch (setting.tag) {
      case SettingTag::kL1:
        x = solve_l1_lp(a, b, false, g, &out.iterations);
        break;
      case SettingTag::kL1Nonneg:
      case SettingTag::kBlockNonneg:
        x = solve_l1_lp(a, b, true, g, &out.iterations);
        break;
      case SettingTag::kBlockQ1:
        if (setting.q == NormIndex::kOne) {
          x = solve_l1_lp(a, b, false, g, &out.iterations);
        } else if (setting.q == NormIndex::kInf) {
          x = solve_linf1_lp(a, b, *setting.partition, g, &out.iterations);
        } else {
          std::optional<VectorXd> gv;
          if (g) gv = *g;
          const VectorSolveResult r =
              min_group_norm(a, b, *setting.partition, setting.q, false, cfg, gv);
          x = r.x;
          out.lp = false;
          out.iterations = r.diagnostics.iterations;
          out.converged = r.diagnostics.converged;
        }
        break;
      default:
        throw InvalidInput("unreachable setting");
    }
    out.signal = x;
  }
  out.objective = setting_objective(setting, out.signal);
  out.residual = (measure(sensing, out.signal) - b).norm();
  return out;
}

// Random direction in the signal space, unit norm in the ambient inner product.
Signal random_direction(const Setting& setting, const Sensing& sensing, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  if (setting.is_matrix()) {
    const auto& ms = matrix_sensing(sensing);
    const SymCoordinates coords = ms.domain();
    VectorXd c(coords.size());
    for (auto& v : c) v = gauss(rng);
    c /= c.norm();
    return coords.unflatten(c);
  }
  VectorXd r(vector_sensing(sensing).cols());
  for (auto& v : r) v = gauss(rng);
  return VectorXd(r / r.norm());
}

Signal scaled(const Signal& x, double a) {
  if (const auto* v = std::get_if<VectorXd>(&x)) return VectorXd(*v * a);
  return std::get<SymMatrix>(x) * a;
}

double objective_tolerance(const SolveOutcome& s) {
  return (s.lp ? 1e-9 : 1e-6) * std::max(1.0, std::abs(s.objective));
}

// Antithetic probes +-eps R around the base optimum `base`.
Uniqueness probe(const Setting& setting, const Sensing& sensing, const VectorXd& b,
                 const SolveOutcome& base, const RecoveryOptions& opt) {
  std::mt19937_64 rng(opt.probe_seed);
  const double scale = std::max(1.0, signal_norm(base.signal));
  const double eps = 1e-6 * scale;
  const double same_tol = opt.signal_tol * scale;
  const Signal r = random_direction(setting, sensing, rng);
  bool all_same = true;
  for (double sign : {1.0, -1.0}) {
    const Signal g = scaled(r, sign * eps);
    const SolveOutcome p = solve_once(setting, sensing, b, opt.admm, &g);
    if (signal_norm(signal_difference(p.signal, base.signal)) <= same_tol) continue;
    all_same = false;
    if (p.objective <= base.objective + objective_tolerance(base)) return Uniqueness::kNonUnique;
  }
  return all_same ? Uniqueness::kUnique : Uniqueness::kUndetermined;
}

}  // namespace

VectorXd measure(const Sensing& sensing, const Signal& x) {
  if (const auto* a = std::get_if<MatrixXd>(&sensing)) {
    const VectorXd& v = as_vector(x);
    if (v.size() != a->cols()) throw InvalidInput("signal length does not match sensing matrix");
    return *a * v;
  }
  return std::get<MatrixSensing>(sensing).apply(as_matrix(x));
}

int ambient_dim(const Setting& setting, const Sensing& sensing) {
  if (setting.is_matrix()) return matrix_sensing(sensing).domain().size();
  return static_cast<int>(vector_sensing(sensing).cols());
}

double setting_objective(const Setting& setting, const Signal& x) {
  switch (setting.tag) {
    case SettingTag::kL1:
    case SettingTag::kL1Nonneg:
    case SettingTag::kBlockNonneg:
      return as_vector(x).lpNorm<1>();
    case SettingTag::kBlockQ1:
      return mixed_norm_q1(as_vector(x), *setting.partition, setting.q);
    case SettingTag::kNuclear:
      return nuclear_norm(as_matrix(x));
    case SettingTag::kBlockNuclear:
      return mixed_norm_star1(as_matrix(x), *setting.partition);
    case SettingTag::kNuclearPsd:
    case SettingTag::kBlockNuclearPsd:
      return as_matrix(x).trace();
  }
  return 0.0;
}

bool in_cone(const Setting& setting, const Signal& x, double tol) {
  if (!setting.has_cone()) return true;
  if (!setting.is_matrix()) return as_vector(x).minCoeff() >= -tol;
  const SymMatrix& m = as_matrix(x);
  const BlockPartition blocks = setting.partition ? *setting.partition : BlockPartition::Whole(m.dim());
  for (const auto& blk : blocks.blocks()) {
    if (symeig(principal_block(m, blk)).eigenvalues.minCoeff() < -tol) return false;
  }
  return true;
}

double signal_norm(const Signal& x) {
  if (const auto* v = std::get_if<VectorXd>(&x)) return v->norm();
  return std::get<SymMatrix>(x).frobenius();
}

Signal signal_difference(const Signal& a, const Signal& b) {
  if (a.index() != b.index()) throw InvalidInput("signal kinds differ");
  if (const auto* v = std::get_if<VectorXd>(&a)) {
    const auto& w = std::get<VectorXd>(b);
    if (v->size() != w.size()) throw InvalidInput("signal lengths differ");
    return VectorXd(*v - w);
  }
  return std::get<SymMatrix>(a) - std::get<SymMatrix>(b);
}

RecoveryResult recover(const Setting& setting, const Sensing& sensing, const VectorXd& b,
                       const RecoveryOptions& options) {
  check_compatible(setting, sensing);
  const int m = setting.is_matrix() ? matrix_sensing(sensing).m()
                                    : static_cast<int>(vector_sensing(sensing).rows());
  if (b.size() != m) throw InvalidInput("len(b) does not match the number of measurements");

  const SolveOutcome base = solve_once(setting, sensing, b, options.admm, nullptr);
  RecoveryResult res;
  res.signal = base.signal;
  res.objective = base.objective;
  res.residual = base.residual;
  res.solver = base.lp ? "lp" : "admm";
  res.iterations = base.iterations;
  res.converged = base.converged;
  if (options.probe_uniqueness) res.unique = probe(setting, sensing, b, base, options);
  return res;
}

RecoveryVerdict check_unique_recovery(const Setting& setting, const Sensing& sensing,
                                      const Signal& x0, const RecoveryOptions& options) {
  check_compatible(setting, sensing);
  if (!in_cone(setting, x0)) throw InvalidInput("x0 is not in the setting's cone");
  const VectorXd b = measure(sensing, x0);
  const SolveOutcome base = solve_once(setting, sensing, b, options.admm, nullptr);
  const double obj0 = setting_objective(setting, x0);
  const double obj_tol = (base.lp ? 1e-9 : 1e-6) * std::max(1.0, std::abs(obj0));
  const double scale = std::max(1.0, signal_norm(x0));

  if (base.objective < obj0 - obj_tol) return RecoveryVerdict::kNotRecovered;
  if (signal_norm(signal_difference(base.signal, x0)) > options.signal_tol * scale) {
    return base.objective <= obj0 + obj_tol ? RecoveryVerdict::kNotRecovered
                                            : RecoveryVerdict::kUndetermined;
  }
  switch (probe(setting, sensing, b, base, options)) {
    case Uniqueness::kUnique: return RecoveryVerdict::kRecoveredUnique;
    case Uniqueness::kNonUnique: return RecoveryVerdict::kNotRecovered;
    case Uniqueness::kUndetermined: break;
  }
  return RecoveryVerdict::kUndetermined;
}

BlockSupport block_support(const Signal& x, const BlockPartition& partition, double tol) {
  if (tol < 0) tol = 1e-8 * (1.0 + signal_norm(x));
  BlockSupport out;
  for (int i = 0; i < partition.num_blocks(); ++i) {
    double nrm = 0.0;
    if (const auto* v = std::get_if<VectorXd>(&x)) {
      if (v->size() != partition.dim()) throw InvalidInput("block_support: dimension mismatch");
      for (int j : partition.block(i)) nrm += (*v)(j) * (*v)(j);
      nrm = std::sqrt(nrm);
    } else {
      const auto& m = std::get<SymMatrix>(x);
      if (m.dim() != partition.dim()) throw InvalidInput("block_support: dimension mismatch");
      nrm = principal_block(m, partition.block(i)).frobenius();
    }
    if (nrm > tol) out.blocks.push_back(i);
  }
  out.count = static_cast<int>(out.blocks.size());
  return out;
}

}  // namespace nsplab
