// adp: benchmark and verification CLI for the asymmetric differential
// privacy library. Each subcommand maps onto run_experiment; see README.
//
// Option precedence: command-line flags override ADP_* environment
// variables, which override values from --config (a JSON file shaped like
// the .config.json echo written next to every report).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adp/experiment.hpp"

namespace {

void load_config_file(const std::string& path, adp::ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("epsilon", config.epsilons);
  get("k", config.ks);
  get("c", config.c);
  get("threshold", config.thresholds);
  get("trials", config.trials);
  get("seed", config.seed);
  get("debias", config.debias);
  get("threads", config.threads);
  get("dataset", config.dataset_path);
  get("synth", config.synth);
  get("synth_records", config.synth_records);
  get("synth_items", config.synth_items);
  get("synth_exponent", config.synth_exponent);
  get("synth_users", config.synth_users);
  get("synth_locations", config.synth_locations);
  get("synth_hot_fraction", config.synth_hot_fraction);
  get("batch_size", config.batch_size);
  get("updates", config.updates);
  get("target_location", config.target_location);
  get("expiry", config.expiry);
  get("out", config.out_path);
  get("emissions", config.emissions_path);
}

void add_common_options(CLI::App* cmd, adp::ExperimentConfig& config,
                        std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "JSON config file (lowest precedence; see .config.json echo)");
  cmd->add_option("--epsilon", config.epsilons, "privacy budget grid")
      ->delimiter(',')
      ->envname("ADP_EPSILON");
  cmd->add_option("--k", config.ks, "top-k grid")->delimiter(',')->envname("ADP_K");
  cmd->add_option("--c", config.c, "above-threshold answer budget (0 = use k)")
      ->envname("ADP_C");
  cmd->add_option("--threshold", config.thresholds, "safety threshold grid")
      ->delimiter(',')
      ->envname("ADP_THRESHOLD");
  cmd->add_option("--trials", config.trials, "independent runs per point")
      ->envname("ADP_TRIALS");
  cmd->add_option("--seed", config.seed, "base seed")->envname("ADP_SEED");
  cmd->add_option("--debias", config.debias,
                  "feed debiased values into error metrics")
      ->envname("ADP_DEBIAS");
  cmd->add_option("--threads", config.threads, "worker threads (0 = hardware)")
      ->envname("ADP_THREADS");
  cmd->add_option("--dataset", config.dataset_path, "input dataset path")
      ->envname("ADP_DATASET");
  cmd->add_option("--synth", config.synth, "synthetic data: zipf|visits|zeros")
      ->envname("ADP_SYNTH");
  cmd->add_option("--synth-records", config.synth_records, "synthetic records")
      ->envname("ADP_SYNTH_RECORDS");
  cmd->add_option("--synth-items", config.synth_items, "synthetic item universe")
      ->envname("ADP_SYNTH_ITEMS");
  cmd->add_option("--synth-exponent", config.synth_exponent, "zipf exponent")
      ->envname("ADP_SYNTH_EXPONENT");
  cmd->add_option("--synth-users", config.synth_users, "synthetic users")
      ->envname("ADP_SYNTH_USERS");
  cmd->add_option("--synth-locations", config.synth_locations,
                  "synthetic location universe")
      ->envname("ADP_SYNTH_LOCATIONS");
  cmd->add_option("--synth-hot-fraction", config.synth_hot_fraction,
                  "fraction of locations that draw most visits")
      ->envname("ADP_SYNTH_HOT_FRACTION");
  cmd->add_option("--batch-size", config.batch_size, "visits per update batch")
      ->envname("ADP_BATCH_SIZE");
  cmd->add_option("--updates", config.updates, "number of update batches")
      ->envname("ADP_UPDATES");
  cmd->add_option("--target", config.target_location, "monitored location id")
      ->envname("ADP_TARGET");
  cmd->add_option("--expiry", config.expiry, "record expiry period (time units)")
      ->envname("ADP_EXPIRY");
  cmd->add_option("--out", config.out_path, "report CSV (or dataset) path")
      ->envname("ADP_OUT");
  cmd->add_option("--emissions", config.emissions_path,
                  "write the first trial's monitor emissions here")
      ->envname("ADP_EMISSIONS");
}

}  // namespace

int main(int argc, char** argv) {
  adp::ExperimentConfig config;

  // Config file first: its values become the defaults the environment and
  // flags are parsed over.
  std::string config_path;
  if (const char* env = std::getenv("ADP_CONFIG")) config_path = env;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) load_config_file(config_path, config);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\"}\n";
    return 1;
  }

  CLI::App app{"asymmetric differential privacy benchmark harness"};
  app.require_subcommand(1);

  const struct {
    const char* name;
    const char* help;
  } subcommands[] = {
      {"topk-rnm", "top-k via asymmetric report-noisy-k-max vs DP baseline"},
      {"topk-svt", "top-k via asymmetric sparse vector vs DP baseline"},
      {"monitor-location", "stream safety monitor for one location"},
      {"monitor-map", "safety monitor over all locations at one time"},
      {"verify", "privacy-inequality checks on shipped and broken mechanisms"},
      {"synth", "generate a synthetic dataset to --out"},
  };
  for (const auto& sc : subcommands)
    add_common_options(app.add_subcommand(sc.name, sc.help), config, config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0)
      std::cerr << "{\"error\":\"" << e.what() << "\"}\n";
    return app.exit(e);
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  try {
    adp::ExperimentReport report = adp::run_experiment(config);
    if (config.out_path.empty()) adp::write_report_csv(report, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\"}\n";
    return 1;
  }
  return 0;
}
