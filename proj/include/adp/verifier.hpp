#ifndef ADP_VERIFIER_HPP
#define ADP_VERIFIER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adp/ledger.hpp"
#include "adp/mechanisms.hpp"
#include "adp/noise.hpp"
#include "adp/policy.hpp"

namespace adp {

enum class CheckMethod { AnalyticDensity, MonteCarloBinned };

/// Result of a privacy-inequality check rooted at one dataset: the largest
/// observed log probability ratio against any neighboring dataset, with the
/// witnessing neighbor and output bucket. A mechanism is flagged when the
/// statistically supported ratio exceeds its claimed epsilon, or when it
/// breaks a one-sidedness claim outright.
struct RatioReport {
  CheckMethod method = CheckMethod::AnalyticDensity;
  std::string mechanism;
  double claimed_epsilon = 0.0;
  double max_log_ratio = 0.0;     // point estimate (exact for analytic)
  double max_ci_log_ratio = 0.0;  // lower confidence bound (Monte Carlo)
  double slack = 0.0;             // max_log_ratio - max_ci_log_ratio
  std::string witness_neighbor;
  std::string witness_bucket;
  std::int64_t trials = 0;
  std::int64_t bins_tested = 0;
  double excluded_mass = 0.0;  // base-arm mass in bins too thin to test
  std::int64_t one_sided_violations = 0;
  bool violation = false;
};

/// Closed-form description of an additive-noise mechanism's output density:
/// count plus exponential (one-sided) or Laplace noise at `noise_rate`.
struct DensityMechanism {
  std::string name;
  Monotonicity monotonicity = Monotonicity::Decreasing;
  double noise_rate = 1.0;
  double claimed_epsilon = 1.0;
};

/// The honest asymmetric Laplace mechanism for a query and budget.
DensityMechanism honest_alap_density(const CountingQuery& query,
                                     const PrivacyBudget& budget);

struct AnalyticOptions {
  double grid_step = 1.0 / 1024;
  double grid_pad = 2.0;
  EnumerationCaps caps{};
};

/// Exact ratio check: evaluates the output density on a dense grid for the
/// dataset and every neighboring dataset and reports the supremum of the log
/// ratio. Infinite ratios (mass outside the neighbor's support) are reported
/// as violations.
RatioReport check_adp_analytic(const DensityMechanism& mechanism,
                               const CountingQuery& query, const Dataset& dataset,
                               const Policy& policy,
                               const AnalyticOptions& options = {});

/// One mechanism run, reduced to a binnable signature. `one_sided_ok` is the
/// run's own check of any one-sidedness the mechanism claims (released values
/// never undercut true counts, Below answers never wrong); mechanisms with no
/// such claim always report true.
struct McOutcome {
  std::vector<double> signature;
  bool one_sided_ok = true;
};

struct McMechanism {
  std::string name;
  double claimed_epsilon = 1.0;
  std::function<McOutcome(const Dataset&, RandomSource&)> run;
};

struct McOptions {
  std::int64_t trials = 200000;
  double bin_width = 0.25;
  int min_bin_count = 50;
  /// Familywise false-flag budget across all (neighbor, bin) tests of one
  /// report; split Bonferroni-style over the tested bins.
  double familywise_alpha = 0.01;
  std::uint64_t seed = 0x5EEDADB0;
  EnumerationCaps caps{};
};

/// Empirical ratio check: runs the mechanism `trials` times on the dataset
/// and on each neighboring dataset, bins the output signatures, and compares
/// per-bin frequencies. A violation needs the binomial lower confidence
/// bound of some bin's ratio to exceed the claimed epsilon, or any trial to
/// break a one-sidedness claim.
RatioReport check_adp_monte_carlo(const McMechanism& mechanism,
                                  const Dataset& dataset, const Policy& policy,
                                  const McOptions& options = {});

/// Probability bound for one-sided exact answers under the asymmetric
/// definition at minimum step k: 1 - e^(-k*epsilon).
double otp_bound_adp(int k, double epsilon);

/// The corresponding bound for (epsilon, delta)-DP at Hamming distance k:
/// delta * sum_{i=1..k} e^((i-1)*epsilon), clamped to 1. Pure DP (delta = 0)
/// admits no one-sided exact answers.
double otp_bound_dp(int k, double epsilon, double delta);

/// Total budget of a recorded run sequence (sequential composition).
double composition_total(const BudgetLedger& ledger);

/// Monte Carlo adapters for the shipped mechanisms, parameterized the way
/// the checker corpus runs them.
McMechanism mc_alap(const Policy& policy, double epsilon);
McMechanism mc_decision(const Policy& policy, double epsilon, double threshold);
McMechanism mc_noisy_kmax(const Policy& policy, double epsilon, int k);
McMechanism mc_svt(const Policy& policy, double epsilon, double threshold, int c);
std::vector<McMechanism> shipped_mechanisms(const Policy& policy, double epsilon);

/// Deliberately broken variants the checker must flag: mis-scaled delta,
/// doubled internal budget, and symmetric noise labeled one-sided.
std::vector<McMechanism> broken_mechanisms(const Policy& policy, double epsilon);

/// Small fixed datasets (d <= 3, n <= 3, each with at least one sensitive
/// value at attribute 0) used by the verification corpus.
std::vector<Dataset> tiny_dataset_corpus();

/// One-line serialization of a report for stream output.
std::string to_witness_line(const RatioReport& report);

}  // namespace adp

#endif  // ADP_VERIFIER_HPP
