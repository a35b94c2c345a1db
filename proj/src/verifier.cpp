#include "adp/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace adp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string describe_record(const Record& r) {
  std::string s = "[";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (i) s += ",";
    s += r.values[i] ? "1" : "0";
  }
  return s + "]";
}

std::string describe_neighbor(const Dataset& base, const Dataset& neighbor) {
  for (int i = 0; i < base.record_count(); ++i) {
    const Record& a = base.records[static_cast<std::size_t>(i)];
    const Record& b = neighbor.records[static_cast<std::size_t>(i)];
    if (!(a == b))
      return "record " + std::to_string(i) + " " + describe_record(a) + "->" +
             describe_record(b);
  }
  return "identity";
}

/// Acklam's rational approximation of the standard normal quantile.
double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "quantile probability must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -normal_quantile(1.0 - p);
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

struct WilsonInterval {
  double lower;
  double upper;
};

WilsonInterval wilson(std::int64_t successes, std::int64_t trials, double z) {
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

DensityMechanism honest_alap_density(const CountingQuery& query,
                                     const PrivacyBudget& budget) {
  require(query.profile.delta > 0.0, "query delta must be positive");
  return DensityMechanism{"alap", query.profile.monotonicity,
                          budget.epsilon() / query.profile.delta,
                          budget.epsilon()};
}

RatioReport check_adp_analytic(const DensityMechanism& mechanism,
                               const CountingQuery& query, const Dataset& dataset,
                               const Policy& policy,
                               const AnalyticOptions& options) {
  RatioReport report;
  report.method = CheckMethod::AnalyticDensity;
  report.mechanism = mechanism.name;
  report.claimed_epsilon = mechanism.claimed_epsilon;

  SensitivityProfile shape{1.0, mechanism.monotonicity};
  double base_count = static_cast<double>(query.evaluate(dataset));

  std::vector<Dataset> neighbors =
      p_neighbor_datasets(dataset, policy, options.caps, false);
  double lo = base_count, hi = base_count;
  std::vector<double> neighbor_counts;
  neighbor_counts.reserve(neighbors.size());
  for (const Dataset& n : neighbors) {
    double c = static_cast<double>(query.evaluate(n));
    neighbor_counts.push_back(c);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }

  double grid_lo = lo - options.grid_pad;
  double grid_hi = hi + options.grid_pad;
  for (std::size_t ni = 0; ni < neighbors.size(); ++ni) {
    for (double z = grid_lo; z <= grid_hi; z += options.grid_step) {
      double num = alap_log_density(z, base_count, shape, mechanism.noise_rate);
      if (num == -kInf) continue;  // no mass at z under the base dataset
      double den =
          alap_log_density(z, neighbor_counts[ni], shape, mechanism.noise_rate);
      double ratio = num - den;  // +inf when the neighbor has no mass at z
      if (ratio > report.max_log_ratio) {
        report.max_log_ratio = ratio;
        report.witness_neighbor = describe_neighbor(dataset, neighbors[ni]);
        char buf[48];
        std::snprintf(buf, sizeof(buf), "z=%.6g", z);
        report.witness_bucket = buf;
      }
      ++report.bins_tested;
    }
  }
  report.max_ci_log_ratio = report.max_log_ratio;
  report.violation = report.max_log_ratio > report.claimed_epsilon + 1e-9;
  return report;
}

RatioReport check_adp_monte_carlo(const McMechanism& mechanism,
                                  const Dataset& dataset, const Policy& policy,
                                  const McOptions& options) {
  require(options.trials >= 1000, "insufficient trials for a meaningful check");
  RatioReport report;
  report.method = CheckMethod::MonteCarloBinned;
  report.mechanism = mechanism.name;
  report.claimed_epsilon = mechanism.claimed_epsilon;
  report.trials = options.trials;

  std::vector<Dataset> arms{dataset};
  for (Dataset& n : p_neighbor_datasets(dataset, policy, options.caps, false))
    arms.push_back(std::move(n));

  using Key = std::vector<std::int32_t>;
  std::vector<std::map<Key, std::int64_t>> histograms(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::int64_t t = 0; t < options.trials; ++t) {
      RandomSource rng(options.seed,
                       (static_cast<std::uint64_t>(a) << 32) |
                           static_cast<std::uint64_t>(t));
      McOutcome outcome = mechanism.run(arms[a], rng);
      if (!outcome.one_sided_ok) ++report.one_sided_violations;
      Key key;
      key.reserve(outcome.signature.size());
      for (double v : outcome.signature)
        key.push_back(static_cast<std::int32_t>(std::floor(v / options.bin_width)));
      ++histograms[a][key];
    }
  }

  // First pass: count the bins that are thick enough to test, so the
  // familywise alpha can be split across them.
  std::int64_t tests = 0;
  for (std::size_t a = 1; a < arms.size(); ++a)
    for (const auto& [key, n1] : histograms[0]) {
      auto it = histograms[a].find(key);
      std::int64_t n2 = it == histograms[a].end() ? 0 : it->second;
      if (n1 >= options.min_bin_count && n2 >= options.min_bin_count) ++tests;
    }
  report.bins_tested = tests;
  double z = tests > 0
                 ? normal_quantile(1.0 - options.familywise_alpha / (2.0 * tests))
                 : 0.0;

  double excluded = 0.0;
  report.max_log_ratio = 0.0;
  report.max_ci_log_ratio = 0.0;
  for (std::size_t a = 1; a < arms.size(); ++a) {
    std::string neighbor_desc;
    for (const auto& [key, n1] : histograms[0]) {
      auto it = histograms[a].find(key);
      std::int64_t n2 = it == histograms[a].end() ? 0 : it->second;
      if (n1 < options.min_bin_count || n2 < options.min_bin_count) {
        excluded += static_cast<double>(n1);
        continue;
      }
      double point = std::log(static_cast<double>(n1) / static_cast<double>(n2));
      WilsonInterval w1 = wilson(n1, options.trials, z);
      WilsonInterval w2 = wilson(n2, options.trials, z);
      double supported = std::log(w1.lower / w2.upper);
      if (point > report.max_log_ratio) {
        report.max_log_ratio = point;
        if (neighbor_desc.empty())
          neighbor_desc = describe_neighbor(dataset, arms[a]);
        report.witness_neighbor = neighbor_desc;
        std::string bucket = "(";
        for (std::size_t i = 0; i < key.size(); ++i) {
          if (i) bucket += ",";
          bucket += std::to_string(key[i]);
        }
        report.witness_bucket = bucket + ")";
      }
      report.max_ci_log_ratio = std::max(report.max_ci_log_ratio, supported);
    }
  }
  // Excluded mass is averaged over the neighbor comparisons it was skipped in.
  std::size_t comparisons = arms.size() > 1 ? arms.size() - 1 : 1;
  report.excluded_mass = excluded / static_cast<double>(comparisons) /
                         static_cast<double>(options.trials);
  report.slack = report.max_log_ratio - report.max_ci_log_ratio;
  report.violation = report.one_sided_violations > 0 ||
                     report.max_ci_log_ratio > report.claimed_epsilon + 1e-9;
  return report;
}

double otp_bound_adp(int k, double epsilon) {
  require(k >= 1, "minimum step must be at least 1");
  require(epsilon > 0.0, "epsilon must be positive");
  return 1.0 - std::exp(-static_cast<double>(k) * epsilon);
}

double otp_bound_dp(int k, double epsilon, double delta) {
  require(k >= 1, "hamming distance must be at least 1");
  require(epsilon >= 0.0, "epsilon must be nonnegative");
  require(delta >= 0.0 && delta <= 1.0, "delta must be in [0,1]");
  double sum = 0.0;
  for (int i = 1; i <= k; ++i) sum += std::exp(static_cast<double>(i - 1) * epsilon);
  return std::min(1.0, delta * sum);
}

double composition_total(const BudgetLedger& ledger) {
  return ledger.total_epsilon();
}

McMechanism mc_alap(const Policy& policy, double epsilon) {
  return McMechanism{
      "alap", epsilon, [policy, epsilon](const Dataset& d, RandomSource& rng) {
        CountingQuery q = make_counting_query(0, policy);
        double truth = static_cast<double>(q.evaluate(d));
        double z = alap_from_count(truth, q.profile, PrivacyBudget(epsilon), rng).raw;
        bool ok = q.profile.monotonicity != Monotonicity::Decreasing ||
                  z >= truth - 1e-9;
        return McOutcome{{z}, ok};
      }};
}

McMechanism mc_decision(const Policy& policy, double epsilon, double threshold) {
  return McMechanism{
      "decision_below_threshold", epsilon,
      [policy, epsilon, threshold](const Dataset& d, RandomSource& rng) {
        CountingQuery q = make_counting_query(0, policy);
        double truth = static_cast<double>(q.evaluate(d));
        DecisionVerdict v = decision_below_threshold_from_count(
            truth, q.profile, threshold, PrivacyBudget(epsilon), rng);
        bool below = v.verdict == Verdict::BelowThreshold;
        bool ok = !(below && truth >= threshold);
        return McOutcome{{below ? 1.0 : 0.0}, ok};
      }};
}

McMechanism mc_noisy_kmax(const Policy& policy, double epsilon, int k) {
  return McMechanism{
      "asymmetric_report_noisy_kmax", epsilon,
      [policy, epsilon, k](const Dataset& d, RandomSource& rng) {
        std::vector<CountingQuery> queries;
        std::vector<double> counts;
        for (int i = 0; i < d.attribute_count; ++i) {
          queries.push_back(make_counting_query(i, policy));
          counts.push_back(static_cast<double>(queries.back().evaluate(d)));
        }
        TopKResult top = asymmetric_report_noisy_kmax(queries, d,
                                                      PrivacyBudget(epsilon), k, rng);
        McOutcome outcome;
        for (const auto& [idx, value] : top.entries) {
          outcome.signature.push_back(static_cast<double>(idx));
          outcome.signature.push_back(value);
          if (value < counts[static_cast<std::size_t>(idx)] - 1e-9)
            outcome.one_sided_ok = false;
        }
        return outcome;
      }};
}

McMechanism mc_svt(const Policy& policy, double epsilon, double threshold, int c) {
  return McMechanism{
      "asymmetric_svt", epsilon,
      [policy, epsilon, threshold, c](const Dataset& d, RandomSource& rng) {
        std::vector<CountingQuery> queries;
        std::vector<double> counts;
        for (int i = 0; i < d.attribute_count; ++i) {
          queries.push_back(make_counting_query(i, policy));
          counts.push_back(static_cast<double>(queries.back().evaluate(d)));
        }
        std::vector<double> thresholds(queries.size(), threshold);
        SvtOutput out = asymmetric_svt(queries, thresholds, d,
                                       PrivacyBudget(epsilon), c, rng);
        McOutcome outcome;
        for (std::size_t i = 0; i < out.answers.size(); ++i) {
          const SvtAnswer& a = out.answers[i];
          bool above = a.kind == SvtAnswer::Kind::Above;
          outcome.signature.push_back(above ? 1.0 : 0.0);
          outcome.signature.push_back(above ? *a.value : 0.0);
          if (above && *a.value < counts[i] - 1e-9) outcome.one_sided_ok = false;
          if (!above && counts[i] >= threshold) outcome.one_sided_ok = false;
        }
        return outcome;
      }};
}

std::vector<McMechanism> shipped_mechanisms(const Policy& policy, double epsilon) {
  return {mc_alap(policy, epsilon), mc_decision(policy, epsilon, 1.5),
          mc_noisy_kmax(policy, epsilon, 1), mc_svt(policy, epsilon, 1.5, 1)};
}

std::vector<McMechanism> broken_mechanisms(const Policy& policy, double epsilon) {
  McMechanism wrong_delta{
      "broken_wrong_delta", epsilon,
      [policy, epsilon](const Dataset& d, RandomSource& rng) {
        CountingQuery q = make_counting_query(0, policy);
        // Noise scaled as if the query's sensitivity were 0.5.
        SensitivityProfile misscaled{0.5, q.profile.monotonicity};
        double truth = static_cast<double>(q.evaluate(d));
        double z = alap_from_count(truth, misscaled, PrivacyBudget(epsilon), rng).raw;
        return McOutcome{{z}, z >= truth - 1e-9};
      }};
  McMechanism doubled{
      "broken_doubled_budget", epsilon,
      [policy, epsilon](const Dataset& d, RandomSource& rng) {
        CountingQuery q = make_counting_query(0, policy);
        double truth = static_cast<double>(q.evaluate(d));
        double z =
            alap_from_count(truth, q.profile, PrivacyBudget(2.0 * epsilon), rng).raw;
        return McOutcome{{z}, z >= truth - 1e-9};
      }};
  McMechanism symmetric{
      "broken_symmetric_one_sided", epsilon,
      [policy, epsilon](const Dataset& d, RandomSource& rng) {
        CountingQuery q = make_counting_query(0, policy);
        double truth = static_cast<double>(q.evaluate(d));
        // Symmetric Laplace noise released under a one-sided claim.
        double z = truth + sample_laplace(PrivacyBudget(epsilon), 1.0, rng);
        return McOutcome{{z}, z >= truth - 1e-9};
      }};
  return {wrong_delta, doubled, symmetric};
}

std::vector<Dataset> tiny_dataset_corpus() {
  auto rec = [](std::initializer_list<int> bits) {
    std::vector<std::uint8_t> v;
    for (int b : bits) v.push_back(static_cast<std::uint8_t>(b));
    return Record(std::move(v));
  };
  std::vector<Dataset> corpus;
  corpus.emplace_back(std::vector<Record>{rec({1, 0})}, 2);
  corpus.emplace_back(std::vector<Record>{rec({1, 0}), rec({0, 0})}, 2);
  corpus.emplace_back(std::vector<Record>{rec({1, 0}), rec({0, 0}), rec({1, 1})}, 2);
  corpus.emplace_back(std::vector<Record>{rec({1, 0, 1}), rec({0, 1, 0}), rec({1, 1, 1})}, 3);
  return corpus;
}

std::string to_witness_line(const RatioReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%s,eps=%.6g,max_log_ratio=%.6g,ci_log_ratio=%.6g,"
                "one_sided_violations=%lld,neighbor=%s,bucket=%s,trials=%lld,"
                "bins=%lld,excluded_mass=%.6g,verdict=%s",
                report.method == CheckMethod::AnalyticDensity ? "analytic" : "monte-carlo",
                report.mechanism.c_str(), report.claimed_epsilon,
                report.max_log_ratio, report.max_ci_log_ratio,
                static_cast<long long>(report.one_sided_violations),
                report.witness_neighbor.empty() ? "-" : report.witness_neighbor.c_str(),
                report.witness_bucket.empty() ? "-" : report.witness_bucket.c_str(),
                static_cast<long long>(report.trials),
                static_cast<long long>(report.bins_tested), report.excluded_mass,
                report.violation ? "VIOLATION" : "ok");
  return buf;
}

}  // namespace adp
