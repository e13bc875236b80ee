#pragma once

#include "nsplab/family.hpp"
#include "nsplab/nsp.hpp"
#include "nsplab/recovery.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace nsplab {

using json = nlohmann::json;

inline constexpr const char* kSchema = "nsp-lab/1";

/// Parsed instance file. Indices in files are 1-based.
struct Instance {
  Setting setting;
  Sensing sensing;
  std::optional<VectorXd> b;
  std::optional<Signal> signal;
};

/// Reads {"schema", "setting", "q", "partition", "A" | ("n", "sensing"), "b",
/// "signal"}. `setting_override` replaces the file's setting tag.
Instance parse_instance(const json& j, const std::optional<SettingTag>& setting_override = {});
json instance_to_json(const Instance& inst);

json signal_to_json(const Signal& x);
Signal signal_from_json(const json& j, bool matrix, int n);
json partition_to_json(const BlockPartition& p);
BlockPartition partition_from_json(const json& j, int n);
json verdict_to_json(const NspVerdict& v);
json family_to_json(const FamilyInstance& inst);
json family_report_to_json(const FamilyReport& r);

/// The block-diagonal operator on S^4 with blocks {1}, {2}, {3,4} whose null
/// space is spanned by diag(3, 1, 1, 1).
MatrixSensing block_psd_example_sensing();
BlockPartition block_psd_example_partition();
VectorXd block_psd_example_b();

struct ExperimentConfig {
  Setting setting;
  int n = 8;
  int m = 6;
  int s = 1;
  int block_size = 1;
  int trials = 50;
  int signals_per_instance = 50;
  std::uint64_t seed = 0;
  int jobs = 1;
  NspOptions nsp;
  RecoveryOptions recovery;
  /// Fixed instance used for every trial instead of random draws.
  std::optional<Sensing> fixed;
};

struct ExperimentSummary {
  int exact_holds = 0;
  int exact_fails = 0;
  int excluded = 0;  // inconclusive or non-exact verdicts
  int violations = 0;
  int signals_tested = 0;
  int signals_recovered = 0;
};

struct ExperimentReport {
  ExperimentSummary summary;
  json body;  // deterministic part
  double seconds = 0.0;
};

/// Random Gaussian instance for a setting (block-diagonal sensing matrices
/// for block matrix settings).
Sensing random_instance(const Setting& setting, int n, int m, std::uint64_t seed);
/// Random s-sparse in-cone signal with nonzero magnitudes in [0.5, 2].
Signal random_sparse_signal(const Setting& setting, int n, int s, std::uint64_t seed);
/// Partition into consecutive blocks of the given size (last block shorter).
BlockPartition uniform_partition(int n, int block_size);

/// Compares exact NSP verdicts with recovery: a holding NSP must recover
/// every sampled s-sparse signal uniquely, a failing one must yield a
/// witness counterexample that is not recovered.
ExperimentReport run_equivalence_experiment(const ExperimentConfig& cfg);

struct FixtureReport {
  bool passed = true;
  json body;
};

/// Re-evaluates the worked examples: the two assumption counterexamples and
/// the PSD vs. unrestricted block-matrix verdict pair.
FixtureReport run_fixture_suite();

}  // namespace nsplab
