#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nsplab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised for malformed or inconsistent caller input.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot finish (stalled pivoting, no
/// convergence where convergence is required).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real symmetric matrix. Symmetry is structural: the constructor
/// symmetrizes its input as (M + M^T) / 2 and rejects inputs whose largest
/// asymmetry |M_ij - M_ji| exceeds the given bound.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::Index n);
  explicit SymMatrix(const MatrixXd& m, double max_asymmetry = 1e-8);

  static SymMatrix Identity(Eigen::Index n);
  static SymMatrix Diagonal(const VectorXd& d);
  /// Builds from the upper triangle stored row-major: (0,0), (0,1), ..., (0,n-1), (1,1), ...
  static SymMatrix FromUpperTriangle(Eigen::Index n, const std::vector<double>& upper);

  Eigen::Index dim() const { return m_.rows(); }
  const MatrixXd& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  /// Largest asymmetry seen in the constructor input.
  double input_asymmetry() const { return asymmetry_; }

  /// Sets (i, j) and (j, i).
  void set(Eigen::Index i, Eigen::Index j, double value);
  std::vector<double> UpperTriangle() const;

  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }
  /// Frobenius inner product.
  double dot(const SymMatrix& other) const;

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator-() const;
  SymMatrix operator*(double a) const;
  SymMatrix& operator+=(const SymMatrix& o);

 private:
  MatrixXd m_;
  double asymmetry_ = 0.0;
};

inline SymMatrix operator*(double a, const SymMatrix& m) { return m * a; }

/// Ordered partition B_1..B_k of {0, ..., n-1} into nonempty blocks with
/// indices sorted inside each block.
class BlockPartition {
 public:
  BlockPartition(std::vector<std::vector<int>> blocks, int n);

  static BlockPartition Singletons(int n);
  static BlockPartition Whole(int n);
  /// Consecutive blocks with the given sizes.
  static BlockPartition FromSizes(const std::vector<int>& sizes);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int dim() const { return n_; }
  const std::vector<int>& block(int i) const { return blocks_.at(i); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int index) const { return owner_.at(index); }
  bool all_singletons() const { return num_blocks() == n_; }

  bool operator==(const BlockPartition& o) const { return blocks_ == o.blocks_; }

 private:
  std::vector<std::vector<int>> blocks_;
  std::vector<int> owner_;
  int n_ = 0;
};

/// Eigen-decomposition M = Q diag(eigenvalues) Q^T with eigenvalues sorted
/// non-increasing.
struct Spectrum {
  VectorXd eigenvalues;
  MatrixXd eigenvectors;
};

/// Symmetric eigendecomposition by cyclic Jacobi sweeps (off-diagonal
/// threshold 1e-14 relative to the Frobenius norm, at most 100 sweeps).
/// Eigenvectors are sign-normalized so that their first nonzero entry is
/// positive; equal eigenvalues are ordered by eigenvector lexicographically.
Spectrum symeig(const SymMatrix& m);

/// Sum of |eigenvalues|.
double nuclear_norm(const SymMatrix& m);

/// Principal submatrix on the given sorted index set.
SymMatrix principal_block(const SymMatrix& m, const std::vector<int>& indices);

/// Sum of per-block nuclear norms; entries outside the blocks are ignored.
double mixed_norm_star1(const SymMatrix& x, const BlockPartition& partition);

enum class NormIndex { kOne, kTwo, kInf };

NormIndex parse_norm_index(double q);
double norm_index_value(NormIndex q);
double lq_norm(const VectorXd& v, NormIndex q);

/// Sum over blocks of the inner l_q norm.
double mixed_norm_q1(const VectorXd& v, const BlockPartition& partition, NormIndex q);

/// Per-block inner norms ||v[B_i]||_q.
VectorXd block_norms(const VectorXd& v, const BlockPartition& partition, NormIndex q);

/// x = plus - minus with plus, minus >= 0 and disjoint supports.
std::pair<VectorXd, VectorXd> signed_split(const VectorXd& x);

/// X = plus - minus with plus, minus PSD, obtained from the positive and
/// negative eigenvalue parts. With a partition the split is taken per block
/// and off-block entries are dropped, so B(X) = B(plus) - B(minus).
std::pair<SymMatrix, SymMatrix> signed_split(const SymMatrix& x,
                                             const std::optional<BlockPartition>& partition = {});

/// Nearest PSD matrix in Frobenius norm.
SymMatrix psd_project(const SymMatrix& m);

/// Keeps the partition's diagonal blocks and zeroes everything else.
SymMatrix block_diagonal_part(const SymMatrix& x, const BlockPartition& partition);

/// Isometric coordinates for symmetric matrices: one coordinate per stored
/// upper-triangle entry, off-diagonal entries weighted by sqrt(2) so that the
/// Euclidean inner product of coordinates equals the Frobenius inner product.
/// With a partition only entries inside the diagonal blocks get coordinates.
class SymCoordinates {
 public:
  explicit SymCoordinates(int n);
  explicit SymCoordinates(const BlockPartition& partition);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<std::pair<int, int>>& entries() const { return entries_; }

  VectorXd flatten(const SymMatrix& x) const;
  SymMatrix unflatten(const VectorXd& coords) const;

 private:
  int n_;
  std::vector<std::pair<int, int>> entries_;
};

}  // namespace nsplab
