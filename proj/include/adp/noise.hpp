#ifndef ADP_NOISE_HPP
#define ADP_NOISE_HPP

#include "adp/policy.hpp"
#include "adp/random.hpp"

namespace adp {

/// Positive privacy budget. Mechanisms consume budgets; splits produce the
/// per-query shares used by composed mechanisms.
class PrivacyBudget {
 public:
  explicit PrivacyBudget(double epsilon);

  double epsilon() const { return epsilon_; }

  /// Equal split into `parts` shares (each epsilon/parts).
  PrivacyBudget split(int parts) const;

 private:
  double epsilon_;
};

/// One perturbed query answer. `raw` is the released value; `debiased`
/// removes the known mean of one-sided noise so it can feed error metrics.
struct NoisyCount {
  double raw;
  double debiased;
  PrivacyBudget budget_spent;
};

/// Draw from the Laplace density (eps/2*delta) * exp(-|x| * eps / delta),
/// by inverse CDF on a single uniform.
double sample_laplace(const PrivacyBudget& budget, double delta,
                      RandomSource& rng);

/// Draw from the one-sided (asymmetric Laplace) noise law for the given
/// monotonicity: nonnegative exponential for Decreasing, mirrored for
/// Increasing, plain Laplace for NonMonotone.
double sample_asymmetric_laplace(const PrivacyBudget& budget, double delta,
                                 Monotonicity mono, RandomSource& rng);

/// Asymmetric Laplace mechanism: evaluates the query and perturbs it with
/// noise matched to the query's sensitivity profile.
NoisyCount alap(const CountingQuery& query, const Dataset& dataset,
                const PrivacyBudget& budget, RandomSource& rng);

/// Same mechanism when the true count is already known. Hot path for
/// benchmark loops that evaluate queries once and perturb many times.
NoisyCount alap_from_count(double true_count, const SensitivityProfile& profile,
                           const PrivacyBudget& budget, RandomSource& rng);

/// Log output density of the asymmetric Laplace mechanism at output z for a
/// given true count. -infinity outside the support. Used by the privacy
/// verifier's analytic ratio check.
double alap_log_density(double z, double true_count,
                        const SensitivityProfile& profile, double epsilon);

}  // namespace adp

#endif  // ADP_NOISE_HPP
