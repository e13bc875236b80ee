#include "nsplab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <type_traits>

namespace nsplab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix(seed ^ splitmix(index + 1));
}

json one_based(const std::vector<int>& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(i + 1);
  return out;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("instance: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance: bad field '") + key + "': " + e.what());
  }
}

NormIndex parse_q(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return NormIndex::kInf;
    throw InvalidInput("q must be 1, 2 or \"inf\"");
  }
  if (!j.is_number()) throw InvalidInput("q must be 1, 2 or \"inf\"");
  return parse_norm_index(j.get<double>());
}

json q_to_json(NormIndex q) {
  if (q == NormIndex::kInf) return "inf";
  return static_cast<int>(norm_index_value(q));
}

// Orthonormal n x t matrix from a Gaussian draw.
MatrixXd random_orthonormal(int n, int t, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd m(n, t);
  for (auto& x : m.reshaped()) x = g(rng);
  const Eigen::HouseholderQR<MatrixXd> qr(m);
  return qr.householderQ() * MatrixXd::Identity(n, t);
}

double magnitude(std::mt19937_64& rng, bool signed_entry) {
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  const double a = mag(rng);
  if (!signed_entry) return a;
  return std::bernoulli_distribution(0.5)(rng) ? a : -a;
}

std::vector<int> choose(int k, int t, std::mt19937_64& rng) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(t, k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SymMatrix random_spectral(int n, int rank, bool psd, std::mt19937_64& rng) {
  const MatrixXd q = random_orthonormal(n, rank, rng);
  VectorXd lam(rank);
  for (auto& l : lam) l = magnitude(rng, !psd);
  return SymMatrix(q * lam.asDiagonal() * q.transpose(), std::numeric_limits<double>::infinity());
}

}  // namespace

json signal_to_json(const Signal& x) {
  if (const auto* v = std::get_if<VectorXd>(&x)) return std::vector<double>(v->begin(), v->end());
  const auto& m = std::get<SymMatrix>(x);
  return json{{"n", m.dim()}, {"upper", m.UpperTriangle()}};
}

Signal signal_from_json(const json& j, bool matrix, int n) {
  try {
    if (!matrix) {
      const auto v = j.get<std::vector<double>>();
      return VectorXd(Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (j.is_object()) {
      return SymMatrix::FromUpperTriangle(j.at("n").get<int>(), j.at("upper").get<std::vector<double>>());
    }
    return SymMatrix::FromUpperTriangle(n, j.get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad signal: ") + e.what());
  }
}

json partition_to_json(const BlockPartition& p) {
  json out = json::array();
  for (const auto& b : p.blocks()) out.push_back(one_based(b));
  return out;
}

BlockPartition partition_from_json(const json& j, int n) {
  std::vector<std::vector<int>> blocks;
  try {
    for (const auto& b : j) {
      std::vector<int> blk;
      for (const auto& i : b) blk.push_back(i.get<int>() - 1);
      blocks.push_back(blk);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad partition: ") + e.what());
  }
  return BlockPartition(blocks, n);
}

Instance parse_instance(const json& j, const std::optional<SettingTag>& setting_override) {
  if (!j.is_object()) throw InvalidInput("instance: expected a JSON object");
  if (field<std::string>(j, "schema") != kSchema) {
    throw InvalidInput(std::string("instance: schema must be \"") + kSchema + "\"");
  }
  Instance inst;
  inst.setting.tag = setting_override ? *setting_override : parse_setting_tag(field<std::string>(j, "setting"));
  if (inst.setting.tag == SettingTag::kBlockQ1 && j.contains("q")) inst.setting.q = parse_q(j.at("q"));

  int n = 0;
  if (inst.setting.is_matrix()) {
    n = field<int>(j, "n");
    if (n < 1) throw InvalidInput("instance: n must be positive");
    std::vector<SymMatrix> mats;
    for (const auto& row : field<std::vector<std::vector<double>>>(j, "sensing")) {
      mats.push_back(SymMatrix::FromUpperTriangle(n, row));
    }
    if (inst.setting.is_block()) inst.setting.partition = partition_from_json(field<json>(j, "partition"), n);
    inst.sensing = MatrixSensing(std::move(mats), inst.setting.partition);
  } else {
    const auto rows = field<std::vector<std::vector<double>>>(j, "A");
    if (rows.empty() || rows.front().empty()) throw InvalidInput("instance: A is empty");
    MatrixXd a(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) throw InvalidInput("instance: ragged rows in A");
      for (std::size_t c = 0; c < rows[r].size(); ++c) a(r, c) = rows[r][c];
    }
    n = static_cast<int>(a.cols());
    if (inst.setting.is_block()) inst.setting.partition = partition_from_json(field<json>(j, "partition"), n);
    inst.sensing = a;
  }
  inst.setting.validate();
  if (j.contains("b")) {
    const auto b = field<std::vector<double>>(j, "b");
    const std::size_t rows = std::visit([](const auto& a) -> std::size_t {
      if constexpr (std::is_same_v<std::decay_t<decltype(a)>, MatrixXd>) {
        return static_cast<std::size_t>(a.rows());
      } else {
        return static_cast<std::size_t>(a.m());
      }
    }, inst.sensing);
    if (b.size() != rows) throw InvalidInput("instance: b must have one entry per measurement");
    inst.b = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  if (j.contains("signal")) inst.signal = signal_from_json(j.at("signal"), inst.setting.is_matrix(), n);
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j{{"schema", kSchema}, {"setting", to_string(inst.setting.tag)}};
  if (inst.setting.tag == SettingTag::kBlockQ1) j["q"] = q_to_json(inst.setting.q);
  if (inst.setting.partition) j["partition"] = partition_to_json(*inst.setting.partition);
  if (const auto* a = std::get_if<MatrixXd>(&inst.sensing)) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < a->rows(); ++r) {
      rows.push_back(std::vector<double>(a->row(r).begin(), a->row(r).end()));
    }
    j["A"] = rows;
  } else {
    const auto& ms = std::get<MatrixSensing>(inst.sensing);
    j["n"] = ms.n();
    json mats = json::array();
    for (const auto& m : ms.mats()) mats.push_back(m.UpperTriangle());
    j["sensing"] = mats;
  }
  if (inst.b) j["b"] = std::vector<double>(inst.b->begin(), inst.b->end());
  if (inst.signal) {
    j["signal"] = std::holds_alternative<SymMatrix>(*inst.signal)
                      ? json(std::get<SymMatrix>(*inst.signal).UpperTriangle())
                      : signal_to_json(*inst.signal);
  }
  return j;
}

json verdict_to_json(const NspVerdict& v) {
  json j{{"holds", v.holds},
         {"order", v.order},
         {"method", to_string(v.method)},
         {"null_dim", v.null_dim},
         {"subsets_checked", v.subsets_checked}};
  if (!v.note.empty()) j["note"] = v.note;
  if (v.witness) {
    j["witness"] = {{"support", one_based(v.witness->support)},
                    {"margin", v.witness->margin},
                    {"v", signal_to_json(v.witness->v)}};
  }
  return j;
}

json family_to_json(const FamilyInstance& inst) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < inst.a.rows(); ++r) {
    rows.push_back(std::vector<double>(inst.a.row(r).begin(), inst.a.row(r).end()));
  }
  return {{"m", inst.m},
          {"k", inst.k},
          {"s_star", inst.s_star},
          {"ts", inst.ts},
          {"interior_point", std::vector<double>(inst.interior_point.begin(), inst.interior_point.end())},
          {"columns_normalized", inst.columns_normalized},
          {"partition", partition_to_json(inst.partition)},
          {"A", rows}};
}

json family_report_to_json(const FamilyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j{{"name", c.name},
           {"order", c.order},
           {"observed", c.observed},
           {"method", c.method},
           {"matches", c.matches()}};
    j["expected"] = c.expected ? json(*c.expected) : json(nullptr);
    if (c.witness) {
      j["witness"] = {{"support", one_based(c.witness->support)},
                      {"margin", c.witness->margin},
                      {"v", signal_to_json(c.witness->v)}};
    }
    checks.push_back(j);
  }
  return {{"valid", r.valid()}, {"checks", checks}};
}

MatrixSensing block_psd_example_sensing() {
  const auto diag = [](std::initializer_list<double> d) {
    return SymMatrix::Diagonal(Eigen::Map<const VectorXd>(d.begin(), static_cast<Eigen::Index>(d.size())));
  };
  SymMatrix a4(4);
  a4.set(2, 3, 1.0);
  return MatrixSensing({diag({0, -1, -1, 2}), diag({1, -1, -1, -1}), diag({0, -1, 1, 0}), a4},
                       block_psd_example_partition());
}

BlockPartition block_psd_example_partition() { return BlockPartition({{0}, {1}, {2, 3}}, 4); }

VectorXd block_psd_example_b() { return (VectorXd(4) << -1, 0, 0, 0).finished(); }

BlockPartition uniform_partition(int n, int block_size) {
  if (block_size < 1) throw InvalidInput("block size must be positive");
  std::vector<int> sizes;
  for (int left = n; left > 0; left -= block_size) sizes.push_back(std::min(block_size, left));
  return BlockPartition::FromSizes(sizes);
}

Sensing random_instance(const Setting& setting, int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw InvalidInput("random_instance: n and m must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  if (!setting.is_matrix()) {
    MatrixXd a(m, n);
    for (auto& x : a.reshaped()) x = g(rng);
    return a;
  }
  std::vector<SymMatrix> mats;
  for (int p = 0; p < m; ++p) {
    SymMatrix x(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (setting.partition && setting.partition->block_of(i) != setting.partition->block_of(j)) continue;
        x.set(i, j, g(rng));
      }
    }
    mats.push_back(x);
  }
  return MatrixSensing(std::move(mats), setting.partition);
}

Signal random_sparse_signal(const Setting& setting, int n, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const bool signed_entries = !setting.has_cone();
  if (!setting.is_matrix()) {
    const BlockPartition p = setting.partition ? *setting.partition : BlockPartition::Singletons(n);
    VectorXd x = VectorXd::Zero(n);
    for (int b : choose(p.num_blocks(), s, rng)) {
      for (int j : p.block(b)) x(j) = magnitude(rng, signed_entries);
    }
    return x;
  }
  if (!setting.partition) return random_spectral(n, std::min(s, n), !signed_entries, rng);
  const BlockPartition& p = *setting.partition;
  SymMatrix x(n);
  for (int b : choose(p.num_blocks(), s, rng)) {
    const auto& idx = p.block(b);
    const SymMatrix blk = random_spectral(static_cast<int>(idx.size()), static_cast<int>(idx.size()),
                                          !signed_entries, rng);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i; j < idx.size(); ++j) x.set(idx[i], idx[j], blk(i, j));
    }
  }
  return x;
}

ExperimentReport run_equivalence_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.setting.validate();
  if (cfg.trials < 0 || cfg.s < 0 || cfg.signals_per_instance < 0) {
    throw InvalidInput("experiment: trials, s and signal count must be nonnegative");
  }
  struct TrialResult {
    json body;
    int kind = 0;  // 0 excluded, 1 holds, 2 fails
    bool violation = false;
    int tested = 0;
    int recovered = 0;
  };
  std::vector<TrialResult> results(cfg.trials);

  const auto run_trial = [&](int t) {
    TrialResult& res = results[t];
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
    res.body = {{"index", t}, {"seed", seed}};
    try {
      const Sensing sensing = cfg.fixed ? *cfg.fixed : random_instance(cfg.setting, cfg.n, cfg.m, seed);
      const int dim = cfg.setting.is_matrix() ? std::get<MatrixSensing>(sensing).n()
                                              : static_cast<int>(std::get<MatrixXd>(sensing).cols());
      NspOptions nsp = cfg.nsp;
      nsp.seed = seed;
      const NspVerdict v = check_nsp(cfg.setting, sensing, cfg.s, nsp);
      res.body["verdict"] = verdict_to_json(v);
      if (v.method != NspMethod::kExact) return;
      if (v.holds) {
        res.kind = 1;
        json outcomes = json::object();
        for (int i = 0; i < cfg.signals_per_instance; ++i) {
          const Signal x0 = random_sparse_signal(cfg.setting, dim, cfg.s, derive_seed(seed, i));
          const RecoveryVerdict r = check_unique_recovery(cfg.setting, sensing, x0, cfg.recovery);
          ++res.tested;
          if (r == RecoveryVerdict::kRecoveredUnique) ++res.recovered;
          outcomes[to_string(r)] = outcomes.value(to_string(r), 0) + 1;
        }
        res.violation = res.recovered != res.tested;
        res.body["recovery"] = outcomes;
      } else {
        res.kind = 2;
        const auto [x0, z] = witness_to_counterexample(cfg.setting, v);
        const RecoveryVerdict r = check_unique_recovery(cfg.setting, sensing, x0, cfg.recovery);
        res.violation = r != RecoveryVerdict::kNotRecovered;
        res.body["counterexample"] = {{"x0", signal_to_json(x0)},
                                      {"z", signal_to_json(z)},
                                      {"recovery", to_string(r)}};
      }
      res.body["violation"] = res.violation;
    } catch (const std::exception& e) {
      res.kind = 0;
      res.body["error"] = e.what();
    }
  };

  const int jobs = std::max(1, std::min(cfg.jobs, cfg.trials));
  if (jobs == 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < cfg.trials; t = next++) run_trial(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  ExperimentReport report;
  json trials = json::array();
  for (const auto& r : results) {
    if (r.kind == 0) ++report.summary.excluded;
    if (r.kind == 1) ++report.summary.exact_holds;
    if (r.kind == 2) ++report.summary.exact_fails;
    report.summary.violations += r.violation ? 1 : 0;
    report.summary.signals_tested += r.tested;
    report.summary.signals_recovered += r.recovered;
    trials.push_back(r.body);
  }
  const auto& s = report.summary;
  report.body = {{"setting", to_string(cfg.setting.tag)},
                 {"order", cfg.s},
                 {"trials", cfg.trials},
                 {"seed", cfg.seed},
                 {"summary",
                  {{"exact_holds", s.exact_holds},
                   {"exact_fails", s.exact_fails},
                   {"excluded", s.excluded},
                   {"violations", s.violations},
                   {"signals_tested", s.signals_tested},
                   {"signals_recovered", s.signals_recovered}}},
                 {"results", trials}};
  if (cfg.fixed) {
    report.body["instance"] = "fixed";
  } else {
    report.body["n"] = cfg.n;
    report.body["m"] = cfg.m;
  }
  if (cfg.setting.partition) report.body["partition"] = partition_to_json(*cfg.setting.partition);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

FixtureReport run_fixture_suite() {
  FixtureReport rep;
  json fixtures = json::array();

  {
    // l1 assumption counterexample; P keeps the first two coordinates.
    const long long z[3] = {2, 0, 0}, x[3] = {0, -1, 0}, v1[3] = {8, 9, 0}, v2[3] = {10, 10, 0};
    long long v[3];
    bool decomposition = true;
    for (int i = 0; i < 3; ++i) {
      v[i] = x[i] - z[i];
      decomposition &= v[i] == v1[i] - v2[i];
    }
    const auto l1 = [](const long long* a, int from, int to) {
      long long s = 0;
      for (int i = from; i < to; ++i) s += a[i] < 0 ? -a[i] : a[i];
      return s;
    };
    const long long lhs = l1(x, 0, 3);
    const long long terms[4] = {l1(z, 0, 3), l1(v1, 0, 2), l1(v2, 0, 2), l1(v, 2, 3)};
    const long long rhs = terms[0] + terms[1] - terms[2] - terms[3];
    const bool ok = decomposition && lhs == 1 && rhs == -1 && lhs > rhs;
    rep.passed &= ok;
    fixtures.push_back({{"name", "l1-assumption-counterexample"},
                        {"norm_Bx", lhs},
                        {"terms", {terms[0], terms[1], terms[2], terms[3]}},
                        {"rhs", rhs},
                        {"passed", ok}});
  }
  {
    // Block-matrix counterexample on blocks {1,2}, {3,4}; P keeps block 1.
    const BlockPartition p({{0, 1}, {2, 3}}, 4);
    SymMatrix zm(4), xm(4), v1(4), v2(4);
    xm.set(0, 0, -1.0);
    v2.set(0, 0, 1.0);
    const SymMatrix v = xm - zm;
    const bool decomposition = (v - (v1 - v2)).frobenius() == 0.0;
    const auto proj = [&](const SymMatrix& m, int block) {
      SymMatrix out(4);
      const auto& idx = p.block(block);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i; j < idx.size(); ++j) out.set(idx[i], idx[j], m(idx[i], idx[j]));
      }
      return out;
    };
    const double terms[4] = {mixed_norm_star1(zm, p), mixed_norm_star1(proj(v1, 0), p),
                             mixed_norm_star1(proj(v2, 0), p), mixed_norm_star1(proj(v, 1), p)};
    const double rhs = terms[0] + terms[1] - terms[2] - terms[3];
    const double lhs = mixed_norm_star1(xm, p);
    const bool ok = decomposition && rhs == -1.0 && lhs == 1.0 && rhs < lhs;
    rep.passed &= ok;
    fixtures.push_back({{"name", "block-matrix-assumption-counterexample"},
                        {"norm_BX", lhs},
                        {"terms", {terms[0], terms[1], terms[2], terms[3]}},
                        {"rhs", rhs},
                        {"passed", ok}});
  }
  {
    const MatrixSensing sensing = block_psd_example_sensing();
    const BlockPartition p = block_psd_example_partition();
    const NullSpaceBasis nb = null_space_basis(sensing);
    const NspVerdict psd = check_nsp_block_matrix_psd(sensing, p, 1);
    const NspVerdict plain = check_nsp_block_matrix(sensing, p, 1);
    const ImplicationTable table = block_psd_implication_table(sensing, p, 1);
    const SymMatrix expected_dir = SymMatrix::Diagonal((VectorXd(4) << 3, 1, 1, 1).finished());
    const bool dir_ok = nb.dim == 1 && (table.direction - expected_dir).frobenius() <= 1e-9;
    const double expected_rows[4][2] = {{0, 6}, {3, 3}, {1, 5}, {2, 4}};
    bool table_ok = table.rows.size() == 4;
    json rows = json::array();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (r < 4) {
        table_ok &= std::abs(row.lhs - expected_rows[r][0]) <= 1e-9 &&
                    std::abs(row.rhs - expected_rows[r][1]) <= 1e-9 && row.satisfied;
      }
      rows.push_back({{"support", one_based(row.support)},
                      {"lhs_coefficient", row.lhs},
                      {"rhs_coefficient", row.rhs},
                      {"premise_alpha_positive", row.premise_positive},
                      {"premise_alpha_negative", row.premise_negative},
                      {"satisfied", row.satisfied}});
    }
    const bool psd_ok = psd.holds && psd.method == NspMethod::kExact;
    const bool plain_ok = !plain.holds && plain.method == NspMethod::kExact && plain.witness &&
                          plain.witness->support == std::vector<int>{0} &&
                          std::abs(plain.witness->margin) <= 1e-12;
    const bool ok = dir_ok && table_ok && psd_ok && plain_ok;
    rep.passed &= ok;
    fixtures.push_back({{"name", "psd-vs-unrestricted-block-matrix"},
                        {"null_dim", nb.dim},
                        {"direction", signal_to_json(table.direction)},
                        {"implications", rows},
                        {"block_psd", verdict_to_json(psd)},
                        {"block", verdict_to_json(plain)},
                        {"passed", ok}});
  }
  rep.body = {{"passed", rep.passed}, {"fixtures", fixtures}};
  return rep;
}

}  // namespace nsplab
