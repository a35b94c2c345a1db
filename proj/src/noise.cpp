#include "adp/noise.hpp"

#include <cmath>
#include <limits>

namespace adp {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

PrivacyBudget::PrivacyBudget(double epsilon) : epsilon_(epsilon) {
  require(std::isfinite(epsilon) && epsilon > 0.0,
          "privacy budget must be positive and finite");
}

PrivacyBudget PrivacyBudget::split(int parts) const {
  require(parts >= 1, "budget split needs at least one part");
  return PrivacyBudget(epsilon_ / parts);
}

double sample_laplace(const PrivacyBudget& budget, double delta,
                      RandomSource& rng) {
  require(delta > 0.0, "delta must be positive");
  double scale = delta / budget.epsilon();
  double u = rng.next_unit_open();
  return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
}

double sample_asymmetric_laplace(const PrivacyBudget& budget, double delta,
                                 Monotonicity mono, RandomSource& rng) {
  require(delta > 0.0, "delta must be positive");
  double rate = budget.epsilon() / delta;
  switch (mono) {
    case Monotonicity::Decreasing:
      return -std::log(rng.next_unit_open()) / rate;
    case Monotonicity::Increasing:
      return std::log(rng.next_unit_open()) / rate;
    case Monotonicity::NonMonotone:
      return sample_laplace(budget, delta, rng);
  }
  return 0.0;
}

NoisyCount alap_from_count(double true_count, const SensitivityProfile& profile,
                           const PrivacyBudget& budget, RandomSource& rng) {
  double raw = true_count + sample_asymmetric_laplace(budget, profile.delta,
                                                      profile.monotonicity, rng);
  double bias = profile.delta / budget.epsilon();
  double debiased = raw;
  if (profile.monotonicity == Monotonicity::Decreasing) debiased = raw - bias;
  if (profile.monotonicity == Monotonicity::Increasing) debiased = raw + bias;
  return NoisyCount{raw, debiased, budget};
}

NoisyCount alap(const CountingQuery& query, const Dataset& dataset,
                const PrivacyBudget& budget, RandomSource& rng) {
  return alap_from_count(static_cast<double>(query.evaluate(dataset)),
                         query.profile, budget, rng);
}

double alap_log_density(double z, double true_count,
                        const SensitivityProfile& profile, double epsilon) {
  require(profile.delta > 0.0, "delta must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  double rate = epsilon / profile.delta;
  double noise = z - true_count;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  switch (profile.monotonicity) {
    case Monotonicity::Decreasing:
      return noise >= 0.0 ? std::log(rate) - rate * noise : kNegInf;
    case Monotonicity::Increasing:
      return noise <= 0.0 ? std::log(rate) + rate * noise : kNegInf;
    case Monotonicity::NonMonotone:
      return std::log(rate / 2.0) - rate * std::abs(noise);
  }
  return kNegInf;
}

}  // namespace adp
