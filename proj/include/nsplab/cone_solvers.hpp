#pragma once

#include "nsplab/linalg.hpp"

#include <optional>
#include <vector>

namespace nsplab {

/// Linear map S^n -> R^m, X -> (<A_1, X>, ..., <A_m, X>). When a partition is
/// attached the operator is in block-diagonal form: every A_p vanishes
/// outside the diagonal blocks, and the natural domain is the block-diagonal
/// subspace (entries outside the blocks are ignored by the block norms).
class MatrixSensing {
 public:
  MatrixSensing(std::vector<SymMatrix> mats, std::optional<BlockPartition> partition = {});

  int n() const { return n_; }
  int m() const { return static_cast<int>(mats_.size()); }
  const std::vector<SymMatrix>& mats() const { return mats_; }
  const std::optional<BlockPartition>& partition() const { return partition_; }

  VectorXd apply(const SymMatrix& x) const;
  /// Rows are the coordinates of each A_p, so that apply(X) = rows * coords(X)
  /// for every X in the coordinate subspace.
  MatrixXd coordinate_matrix(const SymCoordinates& coords) const;
  /// Coordinates of the natural domain: block-diagonal when a partition is
  /// attached, all of S^n otherwise.
  SymCoordinates domain() const;

 private:
  std::vector<SymMatrix> mats_;
  std::optional<BlockPartition> partition_;
  int n_ = 0;
};

/// True when every matrix vanishes outside the partition's diagonal blocks.
bool is_block_diagonal(const std::vector<SymMatrix>& mats, const BlockPartition& partition);

struct AdmmConfig {
  double rho = 1.0;
  int max_iter = 20000;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
};

struct AdmmDiagnostics {
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double final_rho = 0.0;
};

struct MatrixSolveResult {
  SymMatrix x;
  double objective = 0.0;  // ||X||_*, ||X||_{*,1}, or trace(X) when psd
  double residual = 0.0;   // ||A(X) - b||_2
  AdmmDiagnostics diagnostics;
};

struct VectorSolveResult {
  VectorXd x;
  double objective = 0.0;
  double residual = 0.0;
  AdmmDiagnostics diagnostics;
};

/// min ||X||_{*,1} (one block when no partition) s.t. A(X) = b, optionally
/// X PSD. With psd the objective is the trace. The returned X lies exactly in
/// the cone and, with a partition, is exactly block-diagonal. An optional
/// linear term <G, X> is added to the objective (used by uniqueness probes);
/// the reported objective excludes it.
MatrixSolveResult min_nuclear(const MatrixSensing& sensing, const VectorXd& b, bool psd,
                              const std::optional<BlockPartition>& partition,
                              const AdmmConfig& cfg = {},
                              const std::optional<SymMatrix>& linear_term = {});

/// min ||x||_{q,1} s.t. Ax = b, optionally x >= 0.
VectorSolveResult min_group_norm(const MatrixXd& a, const VectorXd& b,
                                 const BlockPartition& partition, NormIndex q, bool nonneg,
                                 const AdmmConfig& cfg = {},
                                 const std::optional<VectorXd>& linear_term = {});

/// Euclidean projection onto the l1 ball of the given radius.
VectorXd project_l1_ball(const VectorXd& v, double radius);

}  // namespace nsplab
