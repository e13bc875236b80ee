// nsp_lab: null space property certification and recovery experiments.
//
// Exit codes: 0 success, 1 validation failure, 2 input error.

#include "nsplab/family.hpp"
#include "nsplab/harness.hpp"
#include "nsplab/nsp.hpp"
#include "nsplab/polytope.hpp"
#include "nsplab/recovery.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace nsplab;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kInputError = 2;

struct Options {
  std::string setting;
  int order = 1;
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  int trials = 50;
  int jobs = 1;
  int m = 0;
  int k = 0;
  int n = 8;
  std::string q;
  int block_size = 1;
  int signals = 50;
  bool validate = false;
  bool outward = false;
  bool normalize = false;
  double tol = 1e-6;
};

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw InvalidInput("cannot write '" + out + "'");
  f << j.dump(2) << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<SettingTag> setting_flag(const Options& o) {
  if (o.setting.empty()) return std::nullopt;
  return parse_setting_tag(o.setting);
}

void apply_q(const Options& o, Setting& s) {
  if (o.q.empty()) return;
  if (s.tag != SettingTag::kBlockQ1) throw InvalidInput("--q only applies to block-q1");
  if (o.q == "inf" || o.q == "infinity") {
    s.q = NormIndex::kInf;
  } else {
    try {
      s.q = parse_norm_index(std::stod(o.q));
    } catch (const std::logic_error&) {
      throw InvalidInput("--q must be 1, 2 or inf");
    }
  }
}

Instance load_instance(const Options& o) {
  if (o.in.empty()) throw InvalidInput("--in is required");
  Instance inst = parse_instance(read_json(o.in), setting_flag(o));
  apply_q(o, inst.setting);
  return inst;
}

int cmd_solve(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Instance inst = load_instance(o);
  if (!inst.b) throw InvalidInput("instance has no measurement vector b");
  RecoveryOptions ro;
  ro.signal_tol = o.tol;
  ro.probe_seed = o.seed;
  const RecoveryResult r = recover(inst.setting, inst.sensing, *inst.b, ro);
  json j{{"schema", kSchema},
         {"command", "solve"},
         {"setting", to_string(inst.setting.tag)},
         {"signal", signal_to_json(r.signal)},
         {"objective", r.objective},
         {"residual", r.residual},
         {"unique", to_string(r.unique)},
         {"solver", r.solver},
         {"iterations", r.iterations},
         {"converged", r.converged}};
  if (inst.setting.partition) {
    const BlockSupport sup = block_support(r.signal, *inst.setting.partition);
    json idx = json::array();
    for (int b : sup.blocks) idx.push_back(b + 1);
    j["block_support"] = idx;
  }
  j["timings"] = {{"total_seconds", seconds_since(t0)}};
  emit(j, o.out);
  return r.converged ? kOk : kValidationFailure;
}

int cmd_check_nsp(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Instance inst = load_instance(o);
  NspOptions opt;
  opt.seed = o.seed;
  const NspVerdict v = check_nsp(inst.setting, inst.sensing, o.order, opt);
  json j{{"schema", kSchema},
         {"command", "check-nsp"},
         {"setting", to_string(inst.setting.tag)},
         {"verdict", verdict_to_json(v)}};
  if (v.witness) j["witness_margin_recomputed"] = evaluate_witness(inst.setting, *v.witness);
  if (inst.setting.tag == SettingTag::kBlockNuclearPsd && v.null_dim == 1) {
    const ImplicationTable table = block_psd_implication_table(
        std::get<MatrixSensing>(inst.sensing), *inst.setting.partition, o.order);
    json rows = json::array();
    for (const auto& r : table.rows) {
      json sup = json::array();
      for (int b : r.support) sup.push_back(b + 1);
      rows.push_back({{"support", sup}, {"lhs_coefficient", r.lhs}, {"rhs_coefficient", r.rhs},
                      {"satisfied", r.satisfied}});
    }
    j["null_direction"] = signal_to_json(table.direction);
    j["implications"] = rows;
  }
  j["timings"] = {{"total_seconds", seconds_since(t0)}};
  emit(j, o.out);
  return v.method == NspMethod::kInconclusive ? kValidationFailure : kOk;
}

FamilyInstance family_from_options(const Options& o) {
  if (!o.in.empty()) {
    const json j = read_json(o.in);
    std::optional<std::vector<double>> ts;
    if (j.contains("ts")) ts = j.at("ts").get<std::vector<double>>();
    return build_family(j.at("m").get<int>(), j.at("k").get<int>(), ts,
                        j.value("columns_normalized", o.normalize));
  }
  if (o.m == 0 || o.k == 0) throw InvalidInput("--m and --k are required");
  return build_family(o.m, o.k, std::nullopt, o.normalize);
}

int run_family(const Options& o, bool validate, const char* command) {
  const auto t0 = std::chrono::steady_clock::now();
  const FamilyInstance inst = family_from_options(o);
  json j{{"schema", kSchema}, {"command", command}, {"family", family_to_json(inst)}};
  bool valid = true;
  if (validate) {
    NspOptions opt;
    opt.seed = o.seed;
    const FamilyReport rep = validate_family(inst, opt);
    j["validation"] = family_report_to_json(rep);
    valid = rep.valid();
  }
  j["timings"] = {{"total_seconds", seconds_since(t0)}};
  emit(j, o.out);
  return valid ? kOk : kValidationFailure;
}

int cmd_check_neighborly(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  if (o.in.empty()) throw InvalidInput("--in is required");
  const json j = read_json(o.in);
  MatrixXd pts;
  if (j.contains("points")) {
    const auto rows = j.at("points").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw InvalidInput("no points");
    pts.resize(rows.front().size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) throw InvalidInput("points differ in dimension");
      for (std::size_t r = 0; r < rows[i].size(); ++r) pts(r, i) = rows[i][r];
    }
  } else {
    const Instance inst = parse_instance(j, SettingTag::kL1Nonneg);
    pts = std::get<MatrixXd>(inst.sensing);
  }
  const bool outward = o.outward || j.value("include_origin", false);
  const PointSet ps = PointSet::FromColumns(pts, outward);
  const bool result = outward ? is_outwardly_neighborly(ps, o.order) : is_neighborly(ps, o.order);
  json out{{"schema", kSchema},
           {"command", "check-neighborly"},
           {"order", o.order},
           {"outward", outward},
           {"neighborly", result}};
  out["timings"] = {{"total_seconds", seconds_since(t0)}};
  emit(out, o.out);
  return kOk;
}

int cmd_experiment(const Options& o) {
  ExperimentConfig cfg;
  if (!o.in.empty()) {
    const Instance inst = load_instance(o);
    cfg.setting = inst.setting;
    cfg.fixed = inst.sensing;
  } else {
    if (o.setting.empty()) throw InvalidInput("--setting is required");
    cfg.setting.tag = parse_setting_tag(o.setting);
    apply_q(o, cfg.setting);
    if (cfg.setting.is_block()) cfg.setting.partition = uniform_partition(o.n, o.block_size);
  }
  cfg.n = o.n;
  cfg.m = o.m > 0 ? o.m : 6;
  cfg.s = o.order;
  cfg.trials = o.trials;
  cfg.signals_per_instance = o.signals;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.recovery.signal_tol = o.tol;
  const ExperimentReport rep = run_equivalence_experiment(cfg);
  json j{{"schema", kSchema}, {"command", "experiment"}, {"report", rep.body}};
  j["timings"] = {{"total_seconds", rep.seconds}};
  emit(j, o.out);
  return rep.summary.violations == 0 ? kOk : kValidationFailure;
}

int cmd_fixtures(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const FixtureReport rep = run_fixture_suite();
  json j{{"schema", kSchema}, {"command", "fixtures"}, {"report", rep.body}};
  j["timings"] = {{"total_seconds", seconds_since(t0)}};
  emit(j, o.out);
  return rep.passed ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Null space property certification and sparse recovery experiments"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write the JSON report here instead of stdout");
    sub->add_option("--seed", o.seed, "Random seed");
  };
  const auto setting_opts = [&](CLI::App* sub) {
    sub->add_option("--setting", o.setting,
                    "l1 | l1-nonneg | block-q1 | block-nonneg | nuclear | nuclear-psd | "
                    "block-nuclear | block-nuclear-psd");
    sub->add_option("--q", o.q, "Inner norm for block-q1: 1, 2 or inf");
    sub->add_option("--in", o.in, "Instance file");
  };

  auto* solve = app.add_subcommand("solve", "Solve the recovery problem for the instance's b");
  setting_opts(solve);
  common(solve);
  solve->add_option("--tol", o.tol, "Relative signal tolerance of the uniqueness probe");

  auto* check = app.add_subcommand("check-nsp", "Certify or falsify a null space property");
  setting_opts(check);
  common(check);
  check->add_option("--order", o.order, "Sparsity order s")->required();

  auto* construct = app.add_subcommand("construct-family", "Build the moment-curve pyramid family");
  common(construct);
  construct->add_option("--m", o.m, "Rows");
  construct->add_option("--k", o.k, "Blocks");
  construct->add_option("--in", o.in, "Family file with m, k and optional ts");
  construct->add_flag("--validate", o.validate, "Also run the validation checks");
  construct->add_flag("--normalize", o.normalize, "Scale columns to unit l2 norm");

  auto* validate = app.add_subcommand("validate-family", "Validate the family's NSP claims");
  common(validate);
  validate->add_option("--m", o.m, "Rows");
  validate->add_option("--k", o.k, "Blocks");
  validate->add_option("--in", o.in, "Family file with m, k and optional ts");
  validate->add_flag("--normalize", o.normalize, "Scale columns to unit l2 norm");

  auto* neighborly = app.add_subcommand("check-neighborly", "Neighborliness of a point set");
  common(neighborly);
  neighborly->add_option("--in", o.in, "Points file or instance file (columns of A)")->required();
  neighborly->add_option("--order", o.order, "Subset size");
  neighborly->add_flag("--outward", o.outward, "Append the origin and test outward neighborliness");

  auto* experiment = app.add_subcommand("experiment", "NSP verdicts versus empirical recovery");
  setting_opts(experiment);
  common(experiment);
  experiment->add_option("--order", o.order, "Sparsity order s");
  experiment->add_option("--trials", o.trials, "Random instances");
  experiment->add_option("--jobs", o.jobs, "Worker threads");
  experiment->add_option("--n", o.n, "Signal dimension");
  experiment->add_option("--m", o.m, "Measurements");
  experiment->add_option("--block-size", o.block_size, "Block size for block settings");
  experiment->add_option("--signals", o.signals, "Sampled signals per holding instance");
  experiment->add_option("--tol", o.tol, "Relative signal tolerance");

  auto* fixtures = app.add_subcommand("fixtures", "Re-evaluate the worked examples");
  common(fixtures);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*check) return cmd_check_nsp(o);
    if (*construct) return run_family(o, o.validate, "construct-family");
    if (*validate) return run_family(o, true, "validate-family");
    if (*neighborly) return cmd_check_neighborly(o);
    if (*experiment) return cmd_experiment(o);
    if (*fixtures) return cmd_fixtures(o);
  } catch (const InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kInputError;
}
