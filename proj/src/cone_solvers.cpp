#include "nsplab/cone_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace nsplab {

MatrixSensing::MatrixSensing(std::vector<SymMatrix> mats, std::optional<BlockPartition> partition)
    : mats_(std::move(mats)), partition_(std::move(partition)) {
  if (mats_.empty()) throw InvalidInput("MatrixSensing: need at least one sensing matrix");
  n_ = static_cast<int>(mats_.front().dim());
  for (const auto& a : mats_) {
    if (a.dim() != n_) throw InvalidInput("MatrixSensing: sensing matrices differ in dimension");
  }
  if (partition_) {
    if (partition_->dim() != n_) throw InvalidInput("MatrixSensing: partition/dimension mismatch");
    if (!is_block_diagonal(mats_, *partition_)) {
      throw InvalidInput("MatrixSensing: sensing matrices are not in block-diagonal form");
    }
  }
}

VectorXd MatrixSensing::apply(const SymMatrix& x) const {
  if (x.dim() != n_) throw InvalidInput("MatrixSensing::apply: dimension mismatch");
  VectorXd out(m());
  for (int p = 0; p < m(); ++p) out(p) = mats_[p].dot(x);
  return out;
}

MatrixXd MatrixSensing::coordinate_matrix(const SymCoordinates& coords) const {
  MatrixXd rows(m(), coords.size());
  for (int p = 0; p < m(); ++p) rows.row(p) = coords.flatten(mats_[p]).transpose();
  return rows;
}

SymCoordinates MatrixSensing::domain() const {
  return partition_ ? SymCoordinates(*partition_) : SymCoordinates(n_);
}

bool is_block_diagonal(const std::vector<SymMatrix>& mats, const BlockPartition& partition) {
  for (const auto& a : mats) {
    if (a.dim() != partition.dim()) return false;
    for (int i = 0; i < a.dim(); ++i) {
      for (int j = i + 1; j < a.dim(); ++j) {
        if (partition.block_of(i) != partition.block_of(j) && a(i, j) != 0.0) return false;
      }
    }
  }
  return true;
}

VectorXd project_l1_ball(const VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - radius) / static_cast<double>(k + 1);
    if (u[k] - t > 0) theta = t;
  }
  VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v(i)) - theta, 0.0);
    out(i) = v(i) < 0 ? -mag : mag;
  }
  return out;
}

namespace {

// Projection onto {x : M x = b} via a cached orthonormal row-space basis.
class AffineProjector {
 public:
  AffineProjector(const MatrixXd& m, const VectorXd& b) {
    const Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() ? sv(0) * 1e-12 * std::max(m.rows(), m.cols()) : 0.0;
    int rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    row_basis_ = svd.matrixV().leftCols(rank);
    // Minimum-norm particular solution M^+ b.
    const VectorXd utb = svd.matrixU().leftCols(rank).transpose() * b;
    particular_ = row_basis_ * utb.cwiseQuotient(sv.head(rank));
  }

  VectorXd project(const VectorXd& w) const {
    return w - row_basis_ * (row_basis_.transpose() * w) + particular_;
  }

 private:
  MatrixXd row_basis_;
  VectorXd particular_;
};

using Prox = std::function<VectorXd(const VectorXd&, double)>;  // (v, step) -> prox_{step f}(v)

// ADMM for min f(z) + <g, x> s.t. M x = b, x = z, with residual balancing.
// Returns z, which lies in dom f exactly.
VectorXd run_admm(const MatrixXd& m, const VectorXd& b, const Prox& prox,
                  const std::optional<VectorXd>& g, const AdmmConfig& cfg, AdmmDiagnostics* diag) {
  if (!(cfg.rho > 0) || cfg.max_iter < 1 || !(cfg.tol_primal > 0) || !(cfg.tol_dual > 0)) {
    throw InvalidInput("AdmmConfig: rho, max_iter and tolerances must be positive");
  }
  const auto dim = m.cols();
  const AffineProjector proj(m, b);
  double rho = cfg.rho;
  VectorXd x = proj.project(VectorXd::Zero(dim));
  VectorXd z = prox(x, 1.0 / rho);
  VectorXd u = VectorXd::Zero(dim);

  diag->converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    VectorXd target = z - u;
    if (g) target -= *g / rho;
    x = proj.project(target);
    const VectorXd z_prev = z;
    z = prox(x + u, 1.0 / rho);
    u += x - z;

    const double r = (x - z).norm();
    const double s = rho * (z - z_prev).norm();
    diag->iterations = it;
    diag->primal_residual = r;
    diag->dual_residual = s;
    if (r <= cfg.tol_primal * (1.0 + std::max(x.norm(), z.norm())) &&
        s <= cfg.tol_dual * (1.0 + rho * u.norm())) {
      diag->converged = true;
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
  diag->final_rho = rho;
  return z;
}

// Applies `f` to each diagonal block of the coordinate vector.
VectorXd per_block(const SymCoordinates& coords, const BlockPartition& partition,
                   const VectorXd& v, const std::function<SymMatrix(const SymMatrix&)>& f) {
  const SymMatrix x = coords.unflatten(v);
  SymMatrix out(x.dim());
  for (const auto& blk : partition.blocks()) {
    const SymMatrix y = f(principal_block(x, blk));
    for (std::size_t i = 0; i < blk.size(); ++i) {
      for (std::size_t j = i; j < blk.size(); ++j) out.set(blk[i], blk[j], y(i, j));
    }
  }
  return coords.flatten(out);
}

SymMatrix spectral_map(const SymMatrix& x, const std::function<double(double)>& f) {
  if (x.dim() == 1) {
    SymMatrix out(1);
    out.set(0, 0, f(x(0, 0)));
    return out;
  }
  const Spectrum sp = symeig(x);
  VectorXd lam = sp.eigenvalues;
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = f(lam(i));
  return SymMatrix(sp.eigenvectors * lam.asDiagonal() * sp.eigenvectors.transpose(),
                   std::numeric_limits<double>::infinity());
}

}  // namespace

MatrixSolveResult min_nuclear(const MatrixSensing& sensing, const VectorXd& b, bool psd,
                              const std::optional<BlockPartition>& partition,
                              const AdmmConfig& cfg, const std::optional<SymMatrix>& linear_term) {
  if (b.size() != sensing.m()) throw InvalidInput("min_nuclear: len(b) != number of measurements");
  const int n = sensing.n();
  if (partition) {
    if (partition->dim() != n) throw InvalidInput("min_nuclear: partition/dimension mismatch");
    if (!is_block_diagonal(sensing.mats(), *partition)) {
      throw InvalidInput("min_nuclear: sensing is not block-diagonal for the given partition");
    }
  }
  const BlockPartition blocks = partition ? *partition : BlockPartition::Whole(n);
  const SymCoordinates coords = partition ? SymCoordinates(*partition) : SymCoordinates(n);
  const MatrixXd m = sensing.coordinate_matrix(coords);

  const Prox prox = [&](const VectorXd& v, double step) {
    return per_block(coords, blocks, v, [&](const SymMatrix& blk) {
      return spectral_map(blk, [&](double lam) {
        if (psd) return std::max(lam - step, 0.0);
        const double mag = std::max(std::abs(lam) - step, 0.0);
        return lam < 0 ? -mag : mag;
      });
    });
  };
  std::optional<VectorXd> g;
  if (linear_term) {
    if (linear_term->dim() != n) throw InvalidInput("min_nuclear: linear term dimension mismatch");
    g = coords.flatten(*linear_term);
  }

  MatrixSolveResult res;
  const VectorXd z = run_admm(m, b, prox, g, cfg, &res.diagnostics);
  res.x = coords.unflatten(z);
  res.objective = psd ? res.x.trace() : mixed_norm_star1(res.x, blocks);
  res.residual = (sensing.apply(res.x) - b).norm();
  return res;
}

VectorSolveResult min_group_norm(const MatrixXd& a, const VectorXd& b,
                                 const BlockPartition& partition, NormIndex q, bool nonneg,
                                 const AdmmConfig& cfg, const std::optional<VectorXd>& linear_term) {
  if (a.rows() != b.size()) throw InvalidInput("min_group_norm: rows(A) != len(b)");
  if (a.cols() != partition.dim()) throw InvalidInput("min_group_norm: partition/dimension mismatch");
  if (linear_term && linear_term->size() != a.cols()) {
    throw InvalidInput("min_group_norm: linear term dimension mismatch");
  }

  const Prox prox = [&](const VectorXd& v_in, double step) {
    const VectorXd v = nonneg ? VectorXd(v_in.cwiseMax(0.0)) : v_in;
    VectorXd out(v.size());
    for (const auto& blk : partition.blocks()) {
      VectorXd sub(blk.size());
      for (std::size_t j = 0; j < blk.size(); ++j) sub(j) = v(blk[j]);
      VectorXd shrunk;
      switch (q) {
        case NormIndex::kOne:
          shrunk = sub.unaryExpr([&](double t) {
            const double mag = std::max(std::abs(t) - step, 0.0);
            return t < 0 ? -mag : mag;
          });
          break;
        case NormIndex::kTwo: {
          const double nrm = sub.norm();
          shrunk = nrm > step ? VectorXd(sub * (1.0 - step / nrm)) : VectorXd::Zero(sub.size());
          break;
        }
        case NormIndex::kInf:
          shrunk = sub - project_l1_ball(sub, step);
          break;
      }
      for (std::size_t j = 0; j < blk.size(); ++j) out(blk[j]) = shrunk(j);
    }
    return out;
  };

  VectorSolveResult res;
  res.x = run_admm(a, b, prox, linear_term, cfg, &res.diagnostics);
  res.objective = mixed_norm_q1(res.x, partition, q);
  res.residual = (a * res.x - b).norm();
  return res;
}

}  // namespace nsplab
