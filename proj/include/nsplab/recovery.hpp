#pragma once

#include "nsplab/cone_solvers.hpp"
#include "nsplab/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nsplab {

/// The eight recovery regimes: (block-)sparse vectors and (block-)low-rank
/// symmetric matrices, each with or without a nonnegativity / PSD cone.
enum class SettingTag {
  kL1,
  kL1Nonneg,
  kBlockQ1,
  kBlockNonneg,
  kNuclear,
  kNuclearPsd,
  kBlockNuclear,
  kBlockNuclearPsd,
};

const char* to_string(SettingTag tag);
SettingTag parse_setting_tag(std::string_view name);

struct Setting {
  SettingTag tag = SettingTag::kL1;
  NormIndex q = NormIndex::kOne;  // inner norm, BLOCK_Q1 only
  std::optional<BlockPartition> partition;

  static Setting L1() { return {SettingTag::kL1, NormIndex::kOne, {}}; }
  static Setting L1Nonneg() { return {SettingTag::kL1Nonneg, NormIndex::kOne, {}}; }
  static Setting BlockQ1(BlockPartition p, NormIndex q) { return {SettingTag::kBlockQ1, q, std::move(p)}; }
  static Setting BlockNonneg(BlockPartition p) { return {SettingTag::kBlockNonneg, NormIndex::kOne, std::move(p)}; }
  static Setting Nuclear() { return {SettingTag::kNuclear, NormIndex::kOne, {}}; }
  static Setting NuclearPsd() { return {SettingTag::kNuclearPsd, NormIndex::kOne, {}}; }
  static Setting BlockNuclear(BlockPartition p) { return {SettingTag::kBlockNuclear, NormIndex::kOne, std::move(p)}; }
  static Setting BlockNuclearPsd(BlockPartition p) {
    return {SettingTag::kBlockNuclearPsd, NormIndex::kOne, std::move(p)};
  }

  bool is_matrix() const;
  bool is_block() const;
  bool has_cone() const;
  /// Throws InvalidInput when the partition/q fields disagree with the tag.
  void validate() const;
};

using Signal = std::variant<VectorXd, SymMatrix>;
using Sensing = std::variant<MatrixXd, MatrixSensing>;

/// A(x) for either kind of sensing map; the signal kind must match.
VectorXd measure(const Sensing& sensing, const Signal& x);
/// Number of unknowns in the setting's natural domain.
int ambient_dim(const Setting& setting, const Sensing& sensing);
/// The setting's recovery objective evaluated at x.
double setting_objective(const Setting& setting, const Signal& x);
/// Membership in the setting's cone (componentwise / per-block eigenvalues
/// >= -tol); always true for unconstrained settings.
bool in_cone(const Setting& setting, const Signal& x, double tol = 1e-7);
double signal_norm(const Signal& x);
Signal signal_difference(const Signal& a, const Signal& b);

enum class Uniqueness { kUnique, kNonUnique, kUndetermined };
const char* to_string(Uniqueness u);

struct RecoveryResult {
  Signal signal;
  double objective = 0.0;
  double residual = 0.0;
  Uniqueness unique = Uniqueness::kUndetermined;
  std::string solver;  // "lp" or "admm"
  int iterations = 0;
  bool converged = true;
};

struct RecoveryOptions {
  AdmmConfig admm;
  /// Relative signal tolerance for "same optimum".
  double signal_tol = 1e-6;
  bool probe_uniqueness = true;
  std::uint64_t probe_seed = 0x5eed;
};

/// Solves the setting's convex recovery problem for b. Vector settings with
/// l1 or l_inf inner norms go through the LP kernel, the rest through ADMM.
/// When probing is enabled the optimum is re-solved with the objective
/// perturbed by +-eps <R, x> for a random unit R; matching optima report
/// kUnique, an equally good distinct optimum reports kNonUnique.
RecoveryResult recover(const Setting& setting, const Sensing& sensing, const VectorXd& b,
                       const RecoveryOptions& options = {});

enum class RecoveryVerdict { kRecoveredUnique, kNotRecovered, kUndetermined };
const char* to_string(RecoveryVerdict v);

RecoveryVerdict check_unique_recovery(const Setting& setting, const Sensing& sensing,
                                      const Signal& x0, const RecoveryOptions& options = {});

struct BlockSupport {
  std::vector<int> blocks;
  int count = 0;
};

/// Blocks whose norm exceeds tol; tol < 0 selects 1e-8 * (1 + ||x||).
BlockSupport block_support(const Signal& x, const BlockPartition& partition, double tol = -1.0);

}  // namespace nsplab
