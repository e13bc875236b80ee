#pragma once

#include "nsplab/cone_solvers.hpp"
#include "nsplab/linalg.hpp"
#include "nsplab/recovery.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nsplab {

/// Orthonormal basis of N(A), stored as the columns of `coords`. For matrix
/// sensing the columns live in the SymCoordinates of the sensing domain.
struct NullSpaceBasis {
  int dim = 0;
  MatrixXd coords;
  std::optional<SymCoordinates> sym;

  Signal element(const VectorXd& c) const;
  std::vector<Signal> basis() const;
};

/// Null space via a long-double SVD; singular values below
/// max(rows, cols) * DBL_EPSILON * sigma_max count as zero.
NullSpaceBasis null_space_basis(const MatrixXd& a);
/// Null space over sensing.domain(): block-diagonal matrices when the
/// operator carries a partition, all of S^n otherwise.
NullSpaceBasis null_space_basis(const MatrixSensing& sensing);
NullSpaceBasis null_space_basis(const Sensing& sensing);

enum class NspMethod { kExact, kNumerical, kFalsifiedOnly, kInconclusive };
const char* to_string(NspMethod m);

/// A violating pair (S, v). `support` holds coordinate indices for L1 and
/// L1_NONNEG, block indices for block settings, and eigenvalue positions for
/// NUCLEAR (|lambda| descending) and NUCLEAR_PSD (lambda descending).
/// margin = RHS - LHS of the strict NSP inequality at (S, v).
struct Witness {
  std::vector<int> support;
  Signal v;
  double margin = 0.0;
};

struct NspVerdict {
  bool holds = true;
  int order = 0;
  NspMethod method = NspMethod::kExact;
  std::optional<Witness> witness;
  int null_dim = 0;
  std::int64_t subsets_checked = 0;
  std::string note;
};

struct NspOptions {
  /// Strictness margin: a tie within mu (relative to the unit-norm null
  /// element) counts as a violation of the strict inequality.
  double mu = 1e-9;
  int falsifier_samples = 100000;
  std::uint64_t seed = 1;
  int grid_points = 1000000;
  std::int64_t max_subsets = 1000000;
  bool stop_at_first_violation = true;
  AdmmConfig admm;
};

NspVerdict check_nsp_classical(const MatrixXd& a, int s, const NspOptions& opt = {});
NspVerdict check_nsp_nonneg(const MatrixXd& a, int s, const NspOptions& opt = {});
NspVerdict check_nsp_block(const MatrixXd& a, const BlockPartition& partition, int s, NormIndex q,
                           const NspOptions& opt = {});
NspVerdict check_nsp_block_nonneg(const MatrixXd& a, const BlockPartition& partition, int s,
                                  const NspOptions& opt = {});
NspVerdict check_nsp_matrix(const MatrixSensing& sensing, int s, const NspOptions& opt = {});
NspVerdict check_nsp_matrix_psd(const MatrixSensing& sensing, int s, const NspOptions& opt = {});
NspVerdict check_nsp_block_matrix(const MatrixSensing& sensing, const BlockPartition& partition,
                                  int s, const NspOptions& opt = {});
NspVerdict check_nsp_block_matrix_psd(const MatrixSensing& sensing,
                                      const BlockPartition& partition, int s,
                                      const NspOptions& opt = {});

/// Dispatches on the setting tag.
NspVerdict check_nsp(const Setting& setting, const Sensing& sensing, int s,
                     const NspOptions& opt = {});

/// RHS - LHS of the setting's NSP inequality at (S, v), by direct
/// substitution. Implication forms return +infinity when the premise fails
/// (beyond a 1e-8 relative tolerance).
double evaluate_witness(const Setting& setting, const Witness& w);

/// Builds an in-cone, s-sparse x0 and a feasible competitor z with
/// A(x0) = A(z) and objective(z) <= objective(x0).
std::pair<Signal, Signal> witness_to_counterexample(const Setting& setting, const Witness& w);
std::pair<Signal, Signal> witness_to_counterexample(const Setting& setting, const NspVerdict& v);

/// A -> {diag(row_p(A))} plus pins E_jk + E_kj that zero every off-diagonal
/// entry of the domain (within blocks when a partition is given, in which
/// case the operator carries the partition).
MatrixSensing diagonal_embedding(const MatrixXd& a,
                                 const std::optional<BlockPartition>& partition = {});

/// One-dimensional block PSD analysis: with N(A) = {alpha V}, the NSP
/// inequality for S reads lhs * alpha < rhs * |alpha| whenever the premise
/// (V_Bi <= 0 on the complement) holds for the sign of alpha.
struct ImplicationRow {
  std::vector<int> support;
  double lhs = 0.0;
  double rhs = 0.0;
  bool premise_positive = false;  // premise holds for alpha > 0
  bool premise_negative = false;  // premise holds for alpha < 0
  bool satisfied = true;
};

struct ImplicationTable {
  SymMatrix direction;  // smallest nonzero |eigenvalue| scaled to 1
  std::vector<ImplicationRow> rows;
};

/// Requires a one-dimensional null space. Lists every S with |S| <= s.
ImplicationTable block_psd_implication_table(const MatrixSensing& sensing,
                                             const BlockPartition& partition, int s);

/// Rescales a symmetric matrix so its smallest nonzero |eigenvalue| is 1 and
/// its first nonzero diagonal entry is positive.
SymMatrix canonical_direction(const SymMatrix& v);

}  // namespace nsplab
