#include "adp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "adp/data.hpp"
#include "adp/mechanisms.hpp"
#include "adp/metrics.hpp"
#include "adp/monitor.hpp"
#include "adp/noise.hpp"
#include "adp/verifier.hpp"

namespace adp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Static round-robin over trials; each body call owns its result slot, so
/// thread count never changes the outcome.
void run_trials(int trials, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  threads = std::min(threads, trials);
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&next, trials, &body] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) body(t);
    });
  for (std::thread& th : pool) th.join();
}

struct Point {
  std::optional<double> epsilon;
  std::optional<int> k;
  std::optional<int> c;
  std::optional<double> threshold;
};

class ReportBuilder {
 public:
  explicit ReportBuilder(const ExperimentConfig& config) : config_(config) {
    report_.config = config;
  }

  /// Aggregates per-trial samples into mean and bootstrap CI. NaN samples
  /// (undefined per-trial metrics) are dropped.
  void add_samples(const Point& point, const std::string& metric,
                   std::vector<double> samples) {
    samples.erase(std::remove_if(samples.begin(), samples.end(),
                                 [](double v) { return std::isnan(v); }),
                  samples.end());
    if (samples.empty()) return;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double lo = mean, hi = mean;
    if (samples.size() >= 2) {
      RandomSource rng(config_.seed ^ 0xB007B007B007ULL, row_counter_);
      std::tie(lo, hi) = bootstrap_ci(samples, rng);
      // The interval always covers the point estimate it is reported with.
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
    }
    push(point, metric, static_cast<int>(samples.size()), mean, lo, hi);
  }

  void add_value(const Point& point, const std::string& metric, double value,
                 int trials = 1) {
    push(point, metric, trials, value, value, value);
  }

  ExperimentReport take() { return std::move(report_); }

 private:
  void push(const Point& point, const std::string& metric, int trials,
            double mean, double lo, double hi) {
    ++row_counter_;
    report_.rows.push_back(MetricRow{point.epsilon, point.k, point.c,
                                     point.threshold, trials, metric, mean, lo,
                                     hi});
  }

  const ExperimentConfig& config_;
  ExperimentReport report_;
  std::uint64_t row_counter_ = 0;
};

std::uint64_t trial_stream(std::size_t point_index, int trial) {
  return (static_cast<std::uint64_t>(point_index) << 32) |
         static_cast<std::uint64_t>(trial);
}

TopKResult entries_from_svt(const SvtOutput& out) {
  TopKResult result;
  for (std::size_t i = 0; i < out.answers.size(); ++i)
    if (out.answers[i].kind == SvtAnswer::Kind::Above && out.answers[i].value)
      result.entries.emplace_back(static_cast<int>(i), *out.answers[i].value);
  std::sort(result.entries.begin(), result.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return result;
}

TopKResult shifted(const TopKResult& result, double shift) {
  TopKResult out = result;
  for (auto& [idx, value] : out.entries) value += shift;
  return out;
}

std::vector<double> load_topk_counts(const ExperimentConfig& config) {
  if (config.synth == "zipf")
    return synth_zipf_transactions(config.synth_records, config.synth_items,
                                   config.synth_exponent, config.seed)
        .universe_counts();
  require(!config.dataset_path.empty(),
          "top-k subcommands need --dataset or --synth zipf");
  return load_transactions(config.dataset_path).universe_counts();
}

/// Batches with `batch_size` visits per update, none at `target`: the
/// monitored location's true count stays zero while the clock advances one
/// unit per update.
std::vector<VisitBatch> zero_count_stream(int updates, int batch_size,
                                          std::int64_t target) {
  std::vector<VisitBatch> batches;
  batches.reserve(static_cast<std::size_t>(updates));
  std::int64_t user = 0;
  for (int u = 0; u < updates; ++u) {
    VisitBatch batch;
    batch.batch_index = u;
    for (int i = 0; i < batch_size; ++i)
      batch.records.push_back(VisitRecord{user++, target + 1, u});
    batches.push_back(std::move(batch));
  }
  return batches;
}

struct MonitorStream {
  std::vector<VisitBatch> batches;
  std::vector<std::int64_t> locations;
};

MonitorStream load_monitor_stream(const ExperimentConfig& config) {
  MonitorStream stream;
  if (config.synth == "zeros") {
    stream.batches = zero_count_stream(
        config.updates, std::max(1, config.batch_size), config.target_location);
    stream.locations = {config.target_location, config.target_location + 1};
    return stream;
  }
  if (config.synth == "visits") {
    TrajectoryDataset data =
        synth_concentrated_visits(config.synth_users, config.synth_locations,
                                  config.synth_hot_fraction, config.seed);
    stream.batches = data.to_batches(config.batch_size);
    stream.locations = data.location_universe;
    return stream;
  }
  require(!config.dataset_path.empty(),
          "monitor subcommands need --dataset or --synth visits|zeros");
  if (config.batch_size <= 0) {
    // Blank-line-delimited batches straight off the stream format.
    std::ifstream in(config.dataset_path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot open stream file: " + config.dataset_path);
    stream.batches = read_visit_stream(in, 0);
    std::set<std::int64_t> universe;
    for (const VisitBatch& b : stream.batches)
      for (const VisitRecord& r : b.records) universe.insert(r.location_id);
    stream.locations.assign(universe.begin(), universe.end());
    return stream;
  }
  TrajectoryDataset data = load_trajectory(config.dataset_path);
  stream.batches = data.to_batches(config.batch_size);
  stream.locations = data.location_universe;
  return stream;
}

void maybe_write_emissions(const ExperimentConfig& config,
                           const std::vector<MonitorEmission>& emissions) {
  if (config.emissions_path.empty()) return;
  std::ofstream out(config.emissions_path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + config.emissions_path);
  write_emissions(out, emissions);
}

void run_topk_rnm(const ExperimentConfig& config, ReportBuilder& builder) {
  std::vector<double> counts = load_topk_counts(config);
  SensitivityProfile profile{1.0, Monotonicity::Decreasing};
  std::size_t point_index = 0;
  for (double epsilon : config.epsilons) {
    for (int k : config.ks) {
      ++point_index;
      PrivacyBudget budget(epsilon);
      double bias = static_cast<double>(k) / epsilon;
      int n = config.trials;
      std::vector<double> acc(n), mse_raw(n), mse_deb(n), acc_base(n), mse_base(n);
      run_trials(n, config.threads, [&](int t) {
        RandomSource rng(config.seed, trial_stream(point_index, t));
        TopKResult mine = asymmetric_report_noisy_kmax_from_counts(
            counts, profile, budget, k, rng);
        TopKMetrics raw = metric_topk(mine, counts, k);
        TopKMetrics deb = metric_topk(shifted(mine, -bias), counts, k);
        TopKResult base =
            baseline_report_noisy_argmax_from_counts(counts, budget, k, rng);
        TopKMetrics basem = metric_topk(base, counts, k);
        acc[t] = raw.accuracy;
        mse_raw[t] = raw.mse;
        mse_deb[t] = deb.mse;
        acc_base[t] = basem.accuracy;
        mse_base[t] = basem.mse;
      });
      Point point{epsilon, k, std::nullopt, std::nullopt};
      builder.add_samples(point, "accuracy.arnm", acc);
      builder.add_samples(point, "mse.arnm", config.debias ? mse_deb : mse_raw);
      builder.add_samples(point, "mse_raw.arnm", mse_raw);
      builder.add_samples(point, "mse_debiased.arnm", mse_deb);
      builder.add_samples(point, "accuracy.baseline", acc_base);
      builder.add_samples(point, "mse.baseline", mse_base);
    }
  }
}

void run_topk_svt(const ExperimentConfig& config, ReportBuilder& builder) {
  std::vector<double> counts = load_topk_counts(config);
  SensitivityProfile profile{1.0, Monotonicity::Decreasing};
  std::size_t point_index = 0;
  for (double epsilon : config.epsilons) {
    for (int k : config.ks) {
      ++point_index;
      PrivacyBudget budget(epsilon);
      int c = config.c > 0 ? config.c : k;
      double bias = static_cast<double>(c) / epsilon;
      int n = config.trials;
      std::vector<double> acc(n), mse_raw(n), mse_deb(n), acc_base(n), mse_base(n);
      run_trials(n, config.threads, [&](int t) {
        RandomSource rng(config.seed, trial_stream(point_index, t));
        double threshold = svt_topk_threshold(counts, k, rng);
        std::vector<double> thresholds(counts.size(), threshold);
        SvtOutput mine = asymmetric_svt_from_counts(counts, thresholds, profile,
                                                    budget, c, rng);
        TopKResult entries = entries_from_svt(mine);
        TopKMetrics raw = metric_topk(entries, counts, k);
        TopKMetrics deb = metric_topk(shifted(entries, -bias), counts, k);
        SvtOutput base = baseline_svt_from_counts(
            counts, thresholds, budget, c, rng, BaselineSvtOptions{true});
        TopKMetrics basem = metric_topk(entries_from_svt(base), counts, k);
        acc[t] = raw.accuracy;
        mse_raw[t] = raw.mse;
        mse_deb[t] = deb.mse;
        acc_base[t] = basem.accuracy;
        mse_base[t] = basem.mse;
      });
      Point point{epsilon, k, c, std::nullopt};
      builder.add_samples(point, "accuracy.asvt", acc);
      builder.add_samples(point, "mse.asvt", config.debias ? mse_deb : mse_raw);
      builder.add_samples(point, "mse_raw.asvt", mse_raw);
      builder.add_samples(point, "mse_debiased.asvt", mse_deb);
      builder.add_samples(point, "accuracy.baseline", acc_base);
      builder.add_samples(point, "mse.baseline", mse_base);
    }
  }
}

void run_monitor_location(const ExperimentConfig& config, ReportBuilder& builder) {
  MonitorStream stream = load_monitor_stream(config);
  require(!stream.batches.empty(), "monitor stream is empty");
  std::vector<MonitorEmission> first_trial;
  std::size_t point_index = 0;
  for (double epsilon : config.epsilons) {
    for (double threshold : config.thresholds) {
      ++point_index;
      int n = config.trials;
      std::vector<double> fn(n), unsafe_rate(n), abstain_rate(n);
      run_trials(n, config.threads, [&](int t) {
        RandomSource rng(config.seed, trial_stream(point_index, t));
        LocationMonitor monitor(config.target_location, threshold,
                                PrivacyBudget(epsilon), config.expiry);
        std::vector<MonitorEmission> emissions;
        std::vector<double> truths, thresholds;
        int unsafe = 0, abstain = 0;
        for (const VisitBatch& batch : stream.batches) {
          MonitorEmission e = monitor.step(batch, rng);
          emissions.push_back(e);
          truths.push_back(static_cast<double>(monitor.true_count()));
          thresholds.push_back(threshold);
          unsafe += e.verdict == SafetyVerdict::Unsafe;
          abstain += e.verdict == SafetyVerdict::Abstain;
        }
        auto ratio = metric_fn_ratio(emissions, truths, thresholds);
        fn[t] = ratio ? *ratio : std::nan("");
        double updates = static_cast<double>(emissions.size());
        unsafe_rate[t] = static_cast<double>(unsafe) / updates;
        abstain_rate[t] = static_cast<double>(abstain) / updates;
        if (t == 0 && point_index == 1) first_trial = emissions;
      });
      Point point{epsilon, std::nullopt, std::nullopt, threshold};
      builder.add_samples(point, "fn_ratio", fn);
      builder.add_samples(point, "unsafe_rate", unsafe_rate);
      builder.add_samples(point, "abstain_rate", abstain_rate);
    }
  }
  maybe_write_emissions(config, first_trial);
}

void run_monitor_map(const ExperimentConfig& config, ReportBuilder& builder) {
  MonitorStream stream = load_monitor_stream(config);
  require(!stream.batches.empty(), "monitor stream is empty");

  // Designated-time semantics: keep each user's first visit only.
  std::set<std::int64_t> seen;
  for (VisitBatch& batch : stream.batches) {
    std::vector<VisitRecord> kept;
    for (const VisitRecord& r : batch.records)
      if (seen.insert(r.user_id).second) kept.push_back(r);
    batch.records = std::move(kept);
  }

  std::vector<VisitBatch>& batches = stream.batches;
  int updates = std::min<int>(config.updates, static_cast<int>(batches.size()));
  const std::vector<std::int64_t>& locations = stream.locations;
  std::vector<MonitorEmission> first_trial;

  std::size_t point_index = 0;
  for (double epsilon : config.epsilons) {
    for (double threshold : config.thresholds) {
      ++point_index;
      int n = config.trials;
      std::vector<std::vector<double>> fn_per_update(
          static_cast<std::size_t>(updates), std::vector<double>(n));
      std::vector<double> fn_overall(n);
      run_trials(n, config.threads, [&](int t) {
        RandomSource rng(config.seed, trial_stream(point_index, t));
        MapMonitor monitor(locations, threshold, PrivacyBudget(epsilon));
        std::vector<MonitorEmission> all;
        std::vector<double> all_truths, all_thresholds;
        for (int u = 0; u < updates; ++u) {
          std::vector<MonitorEmission> emissions =
              monitor.step(batches[static_cast<std::size_t>(u)], rng);
          std::vector<double> truths, ths;
          truths.reserve(locations.size());
          for (std::int64_t l : locations)
            truths.push_back(static_cast<double>(monitor.true_count(l)));
          ths.assign(locations.size(), threshold);
          auto ratio = metric_fn_ratio(emissions, truths, ths);
          fn_per_update[static_cast<std::size_t>(u)][t] =
              ratio ? *ratio : std::nan("");
          all.insert(all.end(), emissions.begin(), emissions.end());
          all_truths.insert(all_truths.end(), truths.begin(), truths.end());
          all_thresholds.insert(all_thresholds.end(), ths.begin(), ths.end());
        }
        auto overall = metric_fn_ratio(all, all_truths, all_thresholds);
        fn_overall[t] = overall ? *overall : std::nan("");
        if (t == 0 && point_index == 1) first_trial = all;
      });
      Point point{epsilon, std::nullopt, std::nullopt, threshold};
      builder.add_samples(point, "fn_ratio", fn_overall);
      for (int u = 0; u < updates; ++u)
        builder.add_samples(point, "fn_ratio.update" + std::to_string(u),
                            fn_per_update[static_cast<std::size_t>(u)]);
    }
  }
  maybe_write_emissions(config, first_trial);
}

void run_verify(const ExperimentConfig& config, ReportBuilder& builder,
                std::vector<std::string>& witness_lines) {
  std::vector<Dataset> corpus = tiny_dataset_corpus();
  for (double epsilon : config.epsilons) {
    Point point{epsilon, std::nullopt, std::nullopt, std::nullopt};

    // Exact density-ratio checks on the additive mechanism and a mis-scaled
    // variant over every corpus dataset.
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Dataset& dataset = corpus[i];
      Policy policy = Policy::visited_sensitive(dataset.attribute_count);
      CountingQuery query = make_counting_query(0, policy);
      RatioReport honest = check_adp_analytic(
          honest_alap_density(query, PrivacyBudget(epsilon)), query, dataset,
          policy);
      witness_lines.push_back(to_witness_line(honest));
      builder.add_value(point, "analytic.max_log_ratio.alap.d" + std::to_string(i),
                        honest.max_log_ratio);
      builder.add_value(point, "analytic.violation.alap.d" + std::to_string(i),
                        honest.violation ? 1.0 : 0.0);

      DensityMechanism wrong{"broken_wrong_delta", query.profile.monotonicity,
                             epsilon / 0.5, epsilon};
      RatioReport broken =
          check_adp_analytic(wrong, query, dataset, policy);
      witness_lines.push_back(to_witness_line(broken));
      builder.add_value(point,
                        "analytic.violation.broken_wrong_delta.d" + std::to_string(i),
                        broken.violation ? 1.0 : 0.0);
    }

    // Binned Monte Carlo checks on the worked three-record example.
    const Dataset& dataset = corpus[2];
    Policy policy = Policy::visited_sensitive(dataset.attribute_count);
    McOptions options;
    options.trials = std::max<std::int64_t>(config.trials, 1000);
    options.seed = config.seed;
    for (const McMechanism& mechanism : shipped_mechanisms(policy, epsilon)) {
      RatioReport report = check_adp_monte_carlo(mechanism, dataset, policy, options);
      witness_lines.push_back(to_witness_line(report));
      builder.add_value(point, "mc.max_log_ratio." + mechanism.name,
                        report.max_log_ratio, static_cast<int>(options.trials));
      builder.add_value(point, "mc.violation." + mechanism.name,
                        report.violation ? 1.0 : 0.0,
                        static_cast<int>(options.trials));
    }
    for (const McMechanism& mechanism : broken_mechanisms(policy, epsilon)) {
      RatioReport report = check_adp_monte_carlo(mechanism, dataset, policy, options);
      witness_lines.push_back(to_witness_line(report));
      builder.add_value(point, "mc.violation." + mechanism.name,
                        report.violation ? 1.0 : 0.0,
                        static_cast<int>(options.trials));
    }
  }
}

void run_synth(const ExperimentConfig& config, ReportBuilder& builder) {
  Point point{std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  if (config.synth == "zipf") {
    TransactionDataset data =
        synth_zipf_transactions(config.synth_records, config.synth_items,
                                config.synth_exponent, config.seed);
    if (!config.out_path.empty()) save_transactions(data, config.out_path);
    builder.add_value(point, "records", static_cast<double>(data.records.size()));
    builder.add_value(point, "items", static_cast<double>(data.item_universe.size()));
  } else if (config.synth == "visits") {
    TrajectoryDataset data =
        synth_concentrated_visits(config.synth_users, config.synth_locations,
                                  config.synth_hot_fraction, config.seed);
    if (!config.out_path.empty()) save_trajectory(data, config.out_path);
    builder.add_value(point, "visits", static_cast<double>(data.visits.size()));
    builder.add_value(point, "locations",
                      static_cast<double>(data.location_universe.size()));
    std::int64_t empty = 0;
    for (std::int64_t l : data.location_universe) empty += data.count_at(l) == 0;
    builder.add_value(point, "zero_visit_locations", static_cast<double>(empty));
  } else {
    throw std::invalid_argument("synth subcommand needs --synth zipf|visits");
  }
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const std::string& line : lines) out << line << '\n';
}

}  // namespace

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "subcommand,epsilon,k,c,threshold,trials,seed,metric,mean,ci_lo,ci_hi\n";
  for (const MetricRow& row : report.rows) {
    out << report.config.subcommand << ',';
    out << (row.epsilon ? format_double(*row.epsilon) : "") << ',';
    out << (row.k ? std::to_string(*row.k) : "") << ',';
    out << (row.c ? std::to_string(*row.c) : "") << ',';
    out << (row.threshold ? format_double(*row.threshold) : "") << ',';
    out << row.trials << ',';
    out << report.config.seed << ',';
    out << row.metric << ',';
    out << format_double(row.mean) << ',' << format_double(row.ci_lo) << ','
        << format_double(row.ci_hi) << '\n';
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["library_version"] = kLibraryVersion;
  j["generator"] = RandomSource::kGeneratorId;
  j["subcommand"] = c.subcommand;
  j["epsilon"] = c.epsilons;
  j["k"] = c.ks;
  j["c"] = c.c;
  j["threshold"] = c.thresholds;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["debias"] = c.debias;
  j["dataset"] = c.dataset_path;
  j["synth"] = c.synth;
  j["synth_records"] = c.synth_records;
  j["synth_items"] = c.synth_items;
  j["synth_exponent"] = c.synth_exponent;
  j["synth_users"] = c.synth_users;
  j["synth_locations"] = c.synth_locations;
  j["synth_hot_fraction"] = c.synth_hot_fraction;
  j["batch_size"] = c.batch_size;
  j["updates"] = c.updates;
  j["target_location"] = c.target_location;
  j["expiry"] = c.expiry;
  j["out"] = c.out_path;
  j["emissions"] = c.emissions_path;
  return j.dump(2) + "\n";
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  require(config.trials >= 1, "trials must be at least 1");
  require(!config.epsilons.empty(), "need at least one epsilon");
  ReportBuilder builder(config);
  std::vector<std::string> witness_lines;

  if (config.subcommand == "topk-rnm")
    run_topk_rnm(config, builder);
  else if (config.subcommand == "topk-svt")
    run_topk_svt(config, builder);
  else if (config.subcommand == "monitor-location")
    run_monitor_location(config, builder);
  else if (config.subcommand == "monitor-map")
    run_monitor_map(config, builder);
  else if (config.subcommand == "verify")
    run_verify(config, builder, witness_lines);
  else if (config.subcommand == "synth")
    run_synth(config, builder);
  else
    throw std::invalid_argument("unknown subcommand: " + config.subcommand);

  ExperimentReport report = builder.take();
  if (!config.out_path.empty()) {
    if (config.subcommand != "synth") {
      std::ofstream out(config.out_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open for writing: " + config.out_path);
      write_report_csv(report, out);
    }
    std::ofstream echo(config.out_path + ".config.json", std::ios::binary);
    if (!echo)
      throw std::runtime_error("cannot open for writing: " + config.out_path +
                               ".config.json");
    echo << config_to_json(config);
    if (config.subcommand == "verify")
      write_lines(config.out_path + ".witness.txt", witness_lines);
  }
  return report;
}

}  // namespace adp
