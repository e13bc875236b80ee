#include "nsplab/family.hpp"
#include "nsplab/harness.hpp"
#include "nsplab/lp.hpp"
#include "nsplab/nsp.hpp"
#include "nsplab/polytope.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace nsplab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", id, title, secs,
              o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd a(rows, cols);
  for (auto& x : a.reshaped()) x = g(rng);
  return a;
}

// Appends "name=ok" or "name=FAILED" and folds the result into pass.
void note(Outcome& o, const std::string& name, bool ok) {
  o.pass &= ok;
  o.detail += name + (ok ? "=ok " : "=FAILED ");
}

Outcome example_block_psd() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixSensing s = block_psd_example_sensing();
  const BlockPartition p = block_psd_example_partition();
  const NullSpaceBasis nb = null_space_basis(s);
  note(o, "null-dim-1", nb.dim == 1);
  if (nb.dim == 1) {
    const SymMatrix dir = canonical_direction(std::get<SymMatrix>(nb.basis()[0]));
    note(o, "direction-3111",
         (dir - SymMatrix::Diagonal((VectorXd(4) << 3, 1, 1, 1).finished())).frobenius() <= 1e-12);
  }
  const NspVerdict psd = check_nsp_block_matrix_psd(s, p, 1);
  note(o, "psd-holds-exact", psd.holds && psd.method == NspMethod::kExact);
  const NspVerdict plain = check_nsp_block_matrix(s, p, 1);
  const bool witness_ok = plain.witness && plain.witness->support == std::vector<int>{0} &&
                          std::abs(plain.witness->margin) <= 1e-12;
  note(o, "plain-fails-exact", !plain.holds && plain.method == NspMethod::kExact);
  note(o, "witness-S1-margin0", witness_ok);
  if (witness_ok) {
    // 3|alpha| on S = {1} against 3|alpha| on the complement.
    const SymMatrix& v = std::get<SymMatrix>(plain.witness->v);
    const double in = mixed_norm_star1(principal_block(v, {0}), BlockPartition::Whole(1));
    const double out = std::abs(v(1, 1)) + nuclear_norm(principal_block(v, {2, 3}));
    note(o, "3a-vs-3a", std::abs(in - out) <= 1e-12 && std::abs(in - 3 * std::abs(v(1, 1))) <= 1e-12);
  }
  note(o, "under-1s", seconds_since(t0) < 1.0);
  return o;
}

Outcome fixture_arithmetic() {
  Outcome o;
  const FixtureReport r = run_fixture_suite();
  const json& f = r.body["fixtures"];
  note(o, "l1-rhs=-1", f[0]["rhs"].get<long long>() == -1 && f[0]["norm_Bx"].get<long long>() == 1);
  note(o, "block-matrix-rhs=-1", f[1]["rhs"].get<double>() == -1.0 && f[1]["norm_BX"].get<double>() == 1.0);
  return o;
}

Outcome family_small() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const FamilyInstance f = build_family(6, 7);
  note(o, "nullity-2", null_space_basis(f.a).dim == 2);
  for (int s = 1; s <= 2; ++s) {
    const NspVerdict v = check_nsp_block_nonneg(f.a, f.partition, s);
    note(o, "block-nonneg-s" + std::to_string(s), v.holds && v.method == NspMethod::kExact);
  }
  note(o, "w1w2-not-face", !spans_face(PointSet::FromColumns(f.a), {0, 1}));
  std::vector<VectorXd> pyramid;
  for (Eigen::Index j = 0; j < f.a.cols(); ++j) {
    if (j != 1) pyramid.push_back(f.a.col(j));
  }
  note(o, "pyramid-2-neighborly", is_neighborly(PointSet(pyramid), 2));
  note(o, "cyclic-2-neighborly", is_neighborly(PointSet(moment_curve_points(4, f.ts)), 2));
  note(o, "under-60s", seconds_since(t0) < 60.0);
  return o;
}

Outcome family_full() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const FamilyInstance f = build_family(12, 13);
  note(o, "nullity-2", null_space_basis(f.a).dim == 2);
  const NspVerdict bn = check_nsp_block_nonneg(f.a, f.partition, 5);
  note(o, "block-nonneg-holds-s5", bn.holds && bn.method == NspMethod::kExact);
  const NspVerdict nn = check_nsp_nonneg(f.a, 5);
  note(o, "nonneg-fails-s5", !nn.holds && nn.method == NspMethod::kExact && nn.witness.has_value());
  const NspVerdict bq = check_nsp_block(f.a, f.partition, 5, NormIndex::kOne);
  note(o, "block-q1-fails-s5", !bq.holds && bq.method == NspMethod::kExact);
  note(o, "under-600s", seconds_since(t0) < 600.0);
  return o;
}

Outcome outward_neighborly_equivalence() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int compared = 0, agree = 0, origin_not_vertex = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % std::min(6, n - 1));
    const MatrixXd a = gaussian(m, n, rng);
    const PointSet ps = PointSet::FromColumns(a, true);
    for (int s = 1; s <= 2; ++s) {
      const NspVerdict v = check_nsp_nonneg(a, s);
      if (v.method != NspMethod::kExact) continue;
      ++compared;
      const bool poly = is_outwardly_neighborly(ps, s);
      if (poly == v.holds) {
        ++agree;
      } else if (!is_vertex(ps, ps.size() - 1)) {
        ++origin_not_vertex;
      }
    }
  }
  std::ostringstream d;
  d << "agree " << agree << "/" << compared << " (disagreements with origin not a vertex: "
    << origin_not_vertex << ")";
  o.detail = d.str();
  o.pass = compared > 0 && agree == compared;
  return o;
}

Outcome recovery_equivalence() {
  Outcome o;
  struct Case {
    Setting setting;
    int n, m, block;
  };
  const std::vector<Case> cases = {
      {Setting::L1(), 8, 5, 1},
      {Setting::L1Nonneg(), 8, 4, 1},
      {Setting::BlockQ1(uniform_partition(10, 2), NormIndex::kOne), 10, 7, 2},
      {Setting::BlockNonneg(uniform_partition(10, 2)), 10, 5, 2},
  };
  int total = 0, excluded = 0, violations = 0;
  for (const Case& c : cases) {
    for (int s = 1; s <= 2; ++s) {
      ExperimentConfig cfg;
      cfg.setting = c.setting;
      cfg.n = c.n;
      cfg.m = c.m + 2 * (s - 1);
      cfg.s = s;
      cfg.block_size = c.block;
      cfg.trials = 50;
      cfg.signals_per_instance = 50;
      cfg.seed = 1000 + 10 * static_cast<int>(c.setting.tag) + s;
      cfg.jobs = 4;
      const ExperimentReport r = run_equivalence_experiment(cfg);
      const ExperimentSummary& sm = r.summary;
      total += cfg.trials;
      excluded += sm.excluded;
      violations += sm.violations;
      o.detail += std::string(to_string(c.setting.tag)) + "/s" + std::to_string(s) + ": holds " +
                  std::to_string(sm.exact_holds) + " fails " + std::to_string(sm.exact_fails) +
                  " excluded " + std::to_string(sm.excluded) + " violations " +
                  std::to_string(sm.violations) + " signals " + std::to_string(sm.signals_recovered) + "/" +
                  std::to_string(sm.signals_tested) + "; ";
    }
  }
  o.pass = violations == 0 && excluded * 20 <= total;
  return o;
}

Outcome weakening_and_embedding() {
  Outcome o;
  std::mt19937_64 rng(77);
  int weakening_bad = 0, weakening_checked = 0;
  const BlockPartition vp = BlockPartition::FromSizes({2, 1, 2, 2});
  for (int trial = 0; trial < 25; ++trial) {
    const MatrixXd a = gaussian(4, 7, rng);
    for (int s = 1; s <= 2; ++s) {
      weakening_checked += 2;
      if (check_nsp_classical(a, s).holds && !check_nsp_nonneg(a, s).holds) ++weakening_bad;
      if (check_nsp_block(a, vp, s, NormIndex::kOne).holds && !check_nsp_block_nonneg(a, vp, s).holds) {
        ++weakening_bad;
      }
    }
  }
  const BlockPartition mp = BlockPartition::FromSizes({2, 1, 2});
  const Setting bm = Setting::BlockNuclear(mp);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 5 + trial % 2;
    const MatrixSensing s = std::get<MatrixSensing>(random_instance(bm, 5, m, 500 + trial));
    const NspVerdict plain = check_nsp_block_matrix(s, mp, 1);
    const NspVerdict psd = check_nsp_block_matrix_psd(s, mp, 1);
    ++weakening_checked;
    if (plain.holds && !psd.holds) ++weakening_bad;
  }
  note(o, "weakening(" + std::to_string(weakening_checked - weakening_bad) + "/" +
              std::to_string(weakening_checked) + ")",
       weakening_bad == 0);

  int embed_checked = 0, embed_bad = 0;
  const BlockPartition ep = BlockPartition::FromSizes({2, 1, 2});
  for (int trial = 0; trial < 25; ++trial) {
    const MatrixXd a = gaussian(3 + trial % 2, 5, rng);
    const MatrixSensing plain = diagonal_embedding(a);
    const MatrixSensing blocked = diagonal_embedding(a, ep);
    for (int s = 1; s <= 2; ++s) {
      const bool pairs[4][2] = {
          {check_nsp_matrix(plain, s).holds, check_nsp_classical(a, s).holds},
          {check_nsp_matrix_psd(plain, s).holds, check_nsp_nonneg(a, s).holds},
          {check_nsp_block_matrix(blocked, ep, s).holds, check_nsp_block(a, ep, s, NormIndex::kOne).holds},
          {check_nsp_block_matrix_psd(blocked, ep, s).holds, check_nsp_block_nonneg(a, ep, s).holds},
      };
      for (const auto& pr : pairs) {
        ++embed_checked;
        if (pr[0] != pr[1]) ++embed_bad;
      }
    }
  }
  note(o, "embedding(" + std::to_string(embed_checked - embed_bad) + "/" + std::to_string(embed_checked) + ")",
       embed_bad == 0);
  return o;
}

double l1_lp(const MatrixXd& a, const VectorXd& b, bool nonneg) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  LpBuilder lp;
  const int p = lp.add_variables(n, 0.0, kInf, 1.0);
  const int q = nonneg ? -1 : lp.add_variables(n, 0.0, kInf, 1.0);
  for (int i = 0; i < m; ++i) {
    LpBuilder::Row row;
    for (int j = 0; j < n; ++j) {
      row.emplace_back(p + j, a(i, j));
      if (!nonneg) row.emplace_back(q + j, -a(i, j));
    }
    lp.add_equal(row, b(i));
  }
  const LpSolution sol = solve_lp(lp.build(LpSense::kMinimize));
  if (sol.status != LpStatus::kOptimal) throw NumericalFailure("reference LP did not solve");
  return sol.objective;
}

Outcome solver_cross_validation() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4 + trial % 3, m = 3;
    const MatrixXd a = gaussian(m, n, rng);
    VectorXd x0 = VectorXd::Zero(n);
    x0(static_cast<int>(rng() % n)) = mag(rng);
    const VectorXd b = a * x0;
    const MatrixSensing s = diagonal_embedding(a);
    VectorXd bb = VectorXd::Zero(s.m());
    bb.head(m) = b;
    const double lp = l1_lp(a, b, false), lp_nonneg = l1_lp(a, b, true);
    const double nuc = min_nuclear(s, bb, false, {}).objective;
    const double tr = min_nuclear(s, bb, true, {}).objective;
    worst = std::max({worst, std::abs(nuc - lp) / std::max(1.0, std::abs(lp)),
                      std::abs(tr - lp_nonneg) / std::max(1.0, std::abs(lp_nonneg))});
  }
  note(o, "diagonal-admm-vs-lp(max rel " + std::to_string(worst) + ")", worst <= 1e-5);

  SymMatrix e11(3);
  e11.set(0, 0, 1.0);
  const double single = min_nuclear(MatrixSensing({e11}), VectorXd::Ones(1), false, {}).objective;
  note(o, "X11=1", std::abs(single - 1.0) <= 1e-6);

  double recon = 0.0;
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const MatrixXd r = gaussian(n, n, rng);
    const SymMatrix x(MatrixXd((r + r.transpose()) / 2.0));
    const Spectrum sp = symeig(x);
    recon = std::max(recon, (sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.transpose() -
                             x.matrix()).norm());
  }
  std::ostringstream d;
  d << "symeig(max err " << recon << ")";
  note(o, d.str(), recon <= 1e-10);
  return o;
}

}  // namespace

int main() {
  run(1, "block PSD example: PSD NSP holds, plain block NSP ties", example_block_psd);
  run(2, "fixture arithmetic evaluates to -1", fixture_arithmetic);
  run(3, "pyramid family m=6 k=7", family_small);
  run(4, "pyramid family m=12 k=13", family_full);
  run(5, "outward neighborliness equals nonnegative NSP", outward_neighborly_equivalence);
  run(6, "NSP verdicts match recovery outcomes", recovery_equivalence);
  run(7, "cone weakening and diagonal embedding", weakening_and_embedding);
  run(8, "solver cross-validation", solver_cross_validation);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
