#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adp/experiment.hpp"

using namespace adp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const MetricRow& find_row(const ExperimentReport& report, const std::string& metric,
                          double epsilon) {
  for (const MetricRow& row : report.rows)
    if (row.metric == metric && row.epsilon && *row.epsilon == epsilon) return row;
  FAIL("missing row ", metric, " at epsilon ", epsilon);
  static MetricRow none;
  return none;
}

}  // namespace

TEST_CASE("top-k accuracy improves with budget and beats the baseline") {
  ExperimentConfig config;
  config.subcommand = "topk-rnm";
  config.synth = "zipf";
  config.synth_records = 2000;
  config.synth_items = 100;
  config.ks = {20};
  config.epsilons = {0.25, 1.0};
  config.trials = 120;
  config.seed = 7;
  ExperimentReport report = run_experiment(config);

  const MetricRow& low = find_row(report, "accuracy.arnm", 0.25);
  const MetricRow& high = find_row(report, "accuracy.arnm", 1.0);
  CHECK(high.mean >= low.mean - (low.ci_hi - low.ci_lo));

  const MetricRow& base = find_row(report, "accuracy.baseline", 1.0);
  CHECK(high.mean > base.mean);
  const MetricRow& mse = find_row(report, "mse.arnm", 1.0);
  const MetricRow& mse_base = find_row(report, "mse.baseline", 1.0);
  CHECK(mse.mean < mse_base.mean);

  // The debias flag selects which mse feeds the headline metric.
  const MetricRow& deb = find_row(report, "mse_debiased.arnm", 1.0);
  CHECK(mse.mean == deb.mean);
}

TEST_CASE("sparse-vector experiment emits both arms") {
  ExperimentConfig config;
  config.subcommand = "topk-svt";
  config.synth = "zipf";
  config.synth_records = 1000;
  config.synth_items = 80;
  config.ks = {10};
  config.epsilons = {0.5};
  config.trials = 60;
  config.seed = 3;
  ExperimentReport report = run_experiment(config);
  const MetricRow& mine = find_row(report, "accuracy.asvt", 0.5);
  const MetricRow& base = find_row(report, "accuracy.baseline", 0.5);
  CHECK(mine.mean >= base.mean);
  CHECK(find_row(report, "mse.asvt", 0.5).trials > 0);
}

TEST_CASE("monitor-location on a zero-count stream matches the tail rate") {
  ExperimentConfig config;
  config.subcommand = "monitor-location";
  config.synth = "zeros";
  config.updates = 2000;
  config.batch_size = 1;
  config.expiry = 1;
  config.epsilons = {1.0};
  config.thresholds = {5.0};
  config.trials = 10;
  config.seed = 21;
  ExperimentReport report = run_experiment(config);
  const MetricRow& fn = find_row(report, "fn_ratio", 1.0);
  // 10 trials x ~2000 updates at p = e^-5: loose 3-sigma band.
  double p = std::exp(-5.0);
  double sigma = std::sqrt(p * (1.0 - p) / 20000.0);
  CHECK(std::abs(fn.mean - p) <= 3.0 * sigma);
}

TEST_CASE("monitor-map reports per-update ratios") {
  ExperimentConfig config;
  config.subcommand = "monitor-map";
  config.synth = "visits";
  config.synth_users = 1000;
  config.synth_locations = 500;
  config.batch_size = 200;
  config.updates = 5;
  config.epsilons = {1.0};
  config.thresholds = {10.0};
  config.trials = 5;
  config.seed = 8;
  ExperimentReport report = run_experiment(config);
  CHECK(find_row(report, "fn_ratio", 1.0).mean < 0.05);
  int update_rows = 0;
  for (const MetricRow& row : report.rows)
    update_rows += row.metric.rfind("fn_ratio.update", 0) == 0;
  CHECK(update_rows == 5);
}

TEST_CASE("verify subcommand passes shipped mechanisms and flags broken ones") {
  ExperimentConfig config;
  config.subcommand = "verify";
  config.trials = 4000;
  config.epsilons = {1.0};
  config.seed = 19;
  ExperimentReport report = run_experiment(config);

  int checks = 0;
  for (const MetricRow& row : report.rows) {
    if (row.metric.rfind("analytic.violation.alap", 0) == 0 ||
        row.metric.rfind("mc.violation.a", 0) == 0 ||
        row.metric.rfind("mc.violation.d", 0) == 0) {
      CHECK(row.mean == 0.0);
      ++checks;
    }
    if (row.metric.rfind("analytic.violation.broken", 0) == 0 ||
        row.metric.rfind("mc.violation.broken", 0) == 0) {
      CHECK(row.mean == 1.0);
      ++checks;
    }
    if (row.metric.rfind("analytic.max_log_ratio.alap", 0) == 0)
      CHECK(row.mean == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(checks >= 11);  // 4 analytic datasets + 4 shipped + 3 broken
}

TEST_CASE("reports are byte-deterministic in the config") {
  ExperimentConfig config;
  config.subcommand = "topk-rnm";
  config.synth = "zipf";
  config.synth_records = 500;
  config.synth_items = 50;
  config.ks = {5};
  config.epsilons = {0.5};
  config.trials = 40;
  config.seed = 1234;
  config.threads = 4;

  config.out_path = temp_path("adp_report_a.csv");
  run_experiment(config);
  std::string first_csv = slurp(config.out_path);
  std::string first_json = slurp(config.out_path + ".config.json");

  config.threads = 1;  // thread count must not affect bytes
  config.out_path = temp_path("adp_report_b.csv");
  run_experiment(config);
  CHECK(slurp(config.out_path) == first_csv);
  CHECK(slurp(config.out_path + ".config.json") != first_json);  // echoes out path

  config.out_path = temp_path("adp_report_a.csv");
  run_experiment(config);
  CHECK(slurp(config.out_path + ".config.json") == first_json);

  for (const char* name : {"adp_report_a.csv", "adp_report_b.csv"}) {
    std::remove(temp_path(name).c_str());
    std::remove((temp_path(name) + ".config.json").c_str());
  }
}

TEST_CASE("csv layout") {
  ExperimentConfig config;
  config.subcommand = "monitor-location";
  config.synth = "zeros";
  config.updates = 50;
  config.batch_size = 1;
  config.expiry = 1;
  config.epsilons = {1.0};
  config.thresholds = {5.0};
  config.trials = 3;
  ExperimentReport report = run_experiment(config);
  std::ostringstream out;
  write_report_csv(report, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "subcommand,epsilon,k,c,threshold,trials,seed,metric,mean,ci_lo,ci_hi");
  std::string row;
  std::getline(lines, row);
  CHECK(row.rfind("monitor-location,1,,,5,3,1,", 0) == 0);
}

TEST_CASE("config echo carries the provenance fields") {
  ExperimentConfig config;
  config.subcommand = "verify";
  std::string json = config_to_json(config);
  CHECK(json.find("\"library_version\"") != std::string::npos);
  CHECK(json.find("splitmix64-counter/v1") != std::string::npos);
  CHECK(json.find("\"seed\": 1") != std::string::npos);
}

TEST_CASE("invalid configurations are rejected") {
  ExperimentConfig config;
  config.subcommand = "nonsense";
  CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

  config.subcommand = "topk-rnm";
  config.synth = "";
  config.dataset_path = "";
  CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);

  config.subcommand = "synth";
  config.synth = "zeros";
  CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("synth subcommand writes a reloadable dataset") {
  ExperimentConfig config;
  config.subcommand = "synth";
  config.synth = "zipf";
  config.synth_records = 100;
  config.synth_items = 20;
  config.seed = 5;
  config.out_path = temp_path("adp_synth_out.dat");
  ExperimentReport report = run_experiment(config);
  CHECK(std::filesystem::exists(config.out_path));
  bool found = false;
  for (const MetricRow& row : report.rows)
    if (row.metric == "records") {
      CHECK(row.mean == 100.0);
      found = true;
    }
  CHECK(found);
  std::remove(config.out_path.c_str());
  std::remove((config.out_path + ".config.json").c_str());
}
