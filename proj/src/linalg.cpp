#include "nsplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nsplab {

namespace {

constexpr double kJacobiThreshold = 1e-14;
constexpr int kJacobiMaxSweeps = 100;

double off_diagonal_norm(const MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) s += 2.0 * a(i, j) * a(i, j);
  }
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(Eigen::Index n) : m_(MatrixXd::Zero(n, n)) {
  if (n < 1) throw InvalidInput("SymMatrix: dimension must be at least 1");
}

SymMatrix::SymMatrix(const MatrixXd& m, double max_asymmetry) {
  if (m.rows() != m.cols()) throw InvalidInput("SymMatrix: input is not square");
  if (m.rows() < 1) throw InvalidInput("SymMatrix: dimension must be at least 1");
  if (!m.allFinite()) throw InvalidInput("SymMatrix: non-finite entry");
  asymmetry_ = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry_ > max_asymmetry) {
    throw InvalidInput("SymMatrix: asymmetry " + std::to_string(asymmetry_) +
                       " exceeds tolerance");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::Identity(Eigen::Index n) {
  SymMatrix s(n);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::Diagonal(const VectorXd& d) {
  SymMatrix s(d.size());
  s.m_.diagonal() = d;
  return s;
}

SymMatrix SymMatrix::FromUpperTriangle(Eigen::Index n, const std::vector<double>& upper) {
  if (n < 1) throw InvalidInput("SymMatrix: dimension must be at least 1");
  if (static_cast<Eigen::Index>(upper.size()) != n * (n + 1) / 2) {
    throw InvalidInput("SymMatrix: upper triangle of a " + std::to_string(n) + "x" +
                       std::to_string(n) + " matrix needs " + std::to_string(n * (n + 1) / 2) +
                       " entries, got " + std::to_string(upper.size()));
  }
  SymMatrix s(n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) s.set(i, j, upper[k++]);
  }
  return s;
}

void SymMatrix::set(Eigen::Index i, Eigen::Index j, double value) {
  m_(i, j) = value;
  m_(j, i) = value;
}

std::vector<double> SymMatrix::UpperTriangle() const {
  std::vector<double> out;
  out.reserve(dim() * (dim() + 1) / 2);
  for (Eigen::Index i = 0; i < dim(); ++i) {
    for (Eigen::Index j = i; j < dim(); ++j) out.push_back(m_(i, j));
  }
  return out;
}

double SymMatrix::dot(const SymMatrix& other) const {
  return m_.cwiseProduct(other.m_).sum();
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  SymMatrix r = *this;
  r.m_ += o.m_;
  return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  SymMatrix r = *this;
  r.m_ -= o.m_;
  return r;
}

SymMatrix SymMatrix::operator-() const {
  SymMatrix r = *this;
  r.m_ = -r.m_;
  return r;
}

SymMatrix SymMatrix::operator*(double a) const {
  SymMatrix r = *this;
  r.m_ *= a;
  return r;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  m_ += o.m_;
  return *this;
}

// ---------------------------------------------------------------------------
// BlockPartition

BlockPartition::BlockPartition(std::vector<std::vector<int>> blocks, int n)
    : blocks_(std::move(blocks)), owner_(n, -1), n_(n) {
  if (n < 1) throw InvalidInput("BlockPartition: n must be at least 1");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto& blk = blocks_[b];
    if (blk.empty()) throw InvalidInput("BlockPartition: empty block");
    std::sort(blk.begin(), blk.end());
    for (int idx : blk) {
      if (idx < 0 || idx >= n) {
        throw InvalidInput("BlockPartition: index " + std::to_string(idx) + " out of range");
      }
      if (owner_[idx] != -1) {
        throw InvalidInput("BlockPartition: index " + std::to_string(idx) +
                           " appears in two blocks");
      }
      owner_[idx] = static_cast<int>(b);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (owner_[i] == -1) {
      throw InvalidInput("BlockPartition: index " + std::to_string(i) + " not covered");
    }
  }
}

BlockPartition BlockPartition::Singletons(int n) {
  std::vector<std::vector<int>> blocks(n);
  for (int i = 0; i < n; ++i) blocks[i] = {i};
  return BlockPartition(std::move(blocks), n);
}

BlockPartition BlockPartition::Whole(int n) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return BlockPartition({all}, n);
}

BlockPartition BlockPartition::FromSizes(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> blocks;
  int next = 0;
  for (int size : sizes) {
    if (size < 1) throw InvalidInput("BlockPartition: block sizes must be positive");
    std::vector<int> blk(size);
    std::iota(blk.begin(), blk.end(), next);
    next += size;
    blocks.push_back(std::move(blk));
  }
  return BlockPartition(std::move(blocks), next);
}

// ---------------------------------------------------------------------------
// Spectral routines

Spectrum symeig(const SymMatrix& m) {
  const Eigen::Index n = m.dim();
  if (n < 1) throw InvalidInput("symeig: dimension 0");
  MatrixXd a = m.matrix();
  MatrixXd v = MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, a.norm());

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kJacobiThreshold * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = a(p, r) = c * arp - s * arq;
            a(r, q) = a(q, r) = s * arp + c * arq;
          }
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i, j) != 0.0) {
        if (v(i, j) < 0.0) v.col(j) = -v.col(j);
        break;
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i, x) != v(i, y)) return v(i, x) < v(i, y);
    }
    return x < y;
  });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

double nuclear_norm(const SymMatrix& m) {
  if (m.dim() == 1) return std::abs(m(0, 0));
  return symeig(m).eigenvalues.cwiseAbs().sum();
}

SymMatrix principal_block(const SymMatrix& m, const std::vector<int>& indices) {
  const auto k = static_cast<Eigen::Index>(indices.size());
  SymMatrix out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) out.set(i, j, m(indices[i], indices[j]));
  }
  return out;
}

double mixed_norm_star1(const SymMatrix& x, const BlockPartition& partition) {
  if (x.dim() != partition.dim()) {
    throw InvalidInput("mixed_norm_star1: partition covers " + std::to_string(partition.dim()) +
                       " indices, matrix has dimension " + std::to_string(x.dim()));
  }
  double total = 0.0;
  for (const auto& blk : partition.blocks()) total += nuclear_norm(principal_block(x, blk));
  return total;
}

NormIndex parse_norm_index(double q) {
  if (q == 1.0) return NormIndex::kOne;
  if (q == 2.0) return NormIndex::kTwo;
  if (std::isinf(q) && q > 0) return NormIndex::kInf;
  throw InvalidInput("unsupported inner norm index q=" + std::to_string(q) +
                     " (supported: 1, 2, inf)");
}

double norm_index_value(NormIndex q) {
  switch (q) {
    case NormIndex::kOne: return 1.0;
    case NormIndex::kTwo: return 2.0;
    case NormIndex::kInf: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double lq_norm(const VectorXd& v, NormIndex q) {
  switch (q) {
    case NormIndex::kOne: return v.lpNorm<1>();
    case NormIndex::kTwo: return v.norm();
    case NormIndex::kInf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

VectorXd block_norms(const VectorXd& v, const BlockPartition& partition, NormIndex q) {
  if (v.size() != partition.dim()) {
    throw InvalidInput("block_norms: vector length " + std::to_string(v.size()) +
                       " does not match partition dimension " + std::to_string(partition.dim()));
  }
  VectorXd out(partition.num_blocks());
  for (int i = 0; i < partition.num_blocks(); ++i) {
    const auto& blk = partition.block(i);
    VectorXd sub(blk.size());
    for (std::size_t j = 0; j < blk.size(); ++j) sub(j) = v(blk[j]);
    out(i) = lq_norm(sub, q);
  }
  return out;
}

double mixed_norm_q1(const VectorXd& v, const BlockPartition& partition, NormIndex q) {
  return block_norms(v, partition, q).sum();
}

std::pair<VectorXd, VectorXd> signed_split(const VectorXd& x) {
  return {x.cwiseMax(0.0), (-x).cwiseMax(0.0)};
}

namespace {

std::pair<SymMatrix, SymMatrix> split_full(const SymMatrix& x) {
  const Spectrum sp = symeig(x);
  const MatrixXd& q = sp.eigenvectors;
  const VectorXd pos = sp.eigenvalues.cwiseMax(0.0);
  const VectorXd neg = (-sp.eigenvalues).cwiseMax(0.0);
  constexpr double kAny = std::numeric_limits<double>::infinity();
  SymMatrix plus(q * pos.asDiagonal() * q.transpose(), kAny);
  SymMatrix minus(q * neg.asDiagonal() * q.transpose(), kAny);
  return {plus, minus};
}

}  // namespace

std::pair<SymMatrix, SymMatrix> signed_split(const SymMatrix& x,
                                             const std::optional<BlockPartition>& partition) {
  if (!partition) return split_full(x);
  if (partition->dim() != x.dim()) throw InvalidInput("signed_split: partition/dimension mismatch");
  SymMatrix plus(x.dim());
  SymMatrix minus(x.dim());
  for (const auto& blk : partition->blocks()) {
    auto [p, m] = split_full(principal_block(x, blk));
    for (std::size_t i = 0; i < blk.size(); ++i) {
      for (std::size_t j = i; j < blk.size(); ++j) {
        plus.set(blk[i], blk[j], p(i, j));
        minus.set(blk[i], blk[j], m(i, j));
      }
    }
  }
  return {plus, minus};
}

SymMatrix psd_project(const SymMatrix& m) { return split_full(m).first; }

SymMatrix block_diagonal_part(const SymMatrix& x, const BlockPartition& partition) {
  if (partition.dim() != x.dim()) {
    throw InvalidInput("block_diagonal_part: partition/dimension mismatch");
  }
  SymMatrix out(x.dim());
  for (const auto& blk : partition.blocks()) {
    for (int i : blk) {
      for (int j : blk) out.set(i, j, x(i, j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SymCoordinates

SymCoordinates::SymCoordinates(int n) : n_(n) {
  if (n < 1) throw InvalidInput("SymCoordinates: dimension must be at least 1");
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) entries_.emplace_back(i, j);
  }
}

SymCoordinates::SymCoordinates(const BlockPartition& partition) : n_(partition.dim()) {
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      if (partition.block_of(i) == partition.block_of(j)) entries_.emplace_back(i, j);
    }
  }
}

VectorXd SymCoordinates::flatten(const SymMatrix& x) const {
  if (x.dim() != n_) throw InvalidInput("SymCoordinates: dimension mismatch");
  VectorXd out(size());
  for (int k = 0; k < size(); ++k) {
    const auto [i, j] = entries_[k];
    out(k) = i == j ? x(i, j) : std::sqrt(2.0) * x(i, j);
  }
  return out;
}

SymMatrix SymCoordinates::unflatten(const VectorXd& coords) const {
  if (coords.size() != size()) throw InvalidInput("SymCoordinates: coordinate count mismatch");
  SymMatrix out(n_);
  for (int k = 0; k < size(); ++k) {
    const auto [i, j] = entries_[k];
    out.set(i, j, i == j ? coords(k) : coords(k) / std::sqrt(2.0));
  }
  return out;
}

}  // namespace nsplab
