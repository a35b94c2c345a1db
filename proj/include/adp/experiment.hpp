#ifndef ADP_EXPERIMENT_HPP
#define ADP_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adp {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Full description of one benchmark run. A config plus the library version
/// pins the results bit-exactly: every random draw derives from `seed`.
struct ExperimentConfig {
  std::string subcommand;  // topk-rnm | topk-svt | monitor-location |
                           // monitor-map | verify | synth

  std::vector<double> epsilons{1.0};
  std::vector<int> ks{100};
  int c = 0;  // above-answer budget for SVT runs; 0 means "use k"
  std::vector<double> thresholds{5.0};
  int trials = 1000;
  std::uint64_t seed = 1;
  bool debias = true;
  int threads = 0;  // 0 = hardware concurrency

  std::string dataset_path;  // transaction or trajectory file, per subcommand
  std::string synth;         // zipf | visits | zeros | "" (use dataset_path)
  int synth_records = 10000;
  int synth_items = 500;
  double synth_exponent = 1.0;
  int synth_users = 2500;
  int synth_locations = 2000;
  double synth_hot_fraction = 0.05;

  int batch_size = 500;  // 0 = batches end at blank lines in the input stream
  int updates = 5;
  std::int64_t target_location = 0;
  std::int64_t expiry = 14;

  std::string out_path;        // report CSV (or dataset file for `synth`)
  std::string emissions_path;  // monitor subcommands: first trial's emissions
};

struct MetricRow {
  std::optional<double> epsilon;
  std::optional<int> k;
  std::optional<int> c;
  std::optional<double> threshold;
  int trials = 0;
  std::string metric;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MetricRow> rows;
};

/// Executes the configured subcommand over `trials` independently seeded
/// runs and aggregates metrics with 95% bootstrap confidence intervals.
/// When `out_path` is set, writes the report CSV (or the generated dataset
/// for `synth`) plus a `<out>.config.json` echo; the `verify` subcommand
/// also writes `<out>.witness.txt`. Outputs are byte-deterministic in the
/// config.
ExperimentReport run_experiment(const ExperimentConfig& config);

void write_report_csv(const ExperimentReport& report, std::ostream& out);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace adp

#endif  // ADP_EXPERIMENT_HPP
