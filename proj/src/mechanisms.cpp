#include "adp/mechanisms.hpp"

#include <algorithm>
#include <cmath>

namespace adp {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<double> evaluate_all(const std::vector<CountingQuery>& queries,
                                 const Dataset& dataset) {
  std::vector<double> counts;
  counts.reserve(queries.size());
  for (const CountingQuery& q : queries)
    counts.push_back(static_cast<double>(q.evaluate(dataset)));
  return counts;
}

SensitivityProfile common_decreasing_profile(
    const std::vector<CountingQuery>& queries) {
  require(!queries.empty(), "query list must not be empty");
  for (const CountingQuery& q : queries) {
    require(q.profile.monotonicity == Monotonicity::Decreasing,
            "mixed or non-decreasing monotonicity in query list");
    require(q.profile.delta == 1.0, "queries must have delta 1");
  }
  return queries.front().profile;
}

/// Indices of the k largest values; ties broken by ascending index.
std::vector<int> top_k_indices(const std::vector<double>& values, int k) {
  std::vector<int> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto better = [&values](int a, int b) {
    if (values[static_cast<std::size_t>(a)] != values[static_cast<std::size_t>(b)])
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  order.resize(static_cast<std::size_t>(k));
  return order;
}

}  // namespace

DecisionVerdict decision_below_threshold_from_count(
    double true_count, const SensitivityProfile& profile, double threshold,
    const PrivacyBudget& budget, RandomSource& rng, BudgetLedger* ledger) {
  require(profile.monotonicity != Monotonicity::NonMonotone,
          "no one-sided guarantee available for non-monotone queries");
  NoisyCount noisy = alap_from_count(true_count, profile, budget, rng);
  bool below = noisy.raw < threshold;
  // Nonnegative noise cannot push a true above-threshold count below T, so
  // Below is the exact side for Decreasing queries; mirrored for Increasing.
  bool exact_side = profile.monotonicity == Monotonicity::Decreasing ? below : !below;
  if (ledger) ledger->record("decision_below_threshold", budget);
  return DecisionVerdict{below ? Verdict::BelowThreshold : Verdict::AboveThreshold,
                         exact_side};
}

DecisionVerdict decision_below_threshold(const CountingQuery& query,
                                         const Dataset& dataset, double threshold,
                                         const PrivacyBudget& budget,
                                         RandomSource& rng, BudgetLedger* ledger) {
  return decision_below_threshold_from_count(
      static_cast<double>(query.evaluate(dataset)), query.profile, threshold,
      budget, rng, ledger);
}

TopKResult asymmetric_report_noisy_kmax_from_counts(
    const std::vector<double>& true_counts, const SensitivityProfile& profile,
    const PrivacyBudget& budget, int k, RandomSource& rng, BudgetLedger* ledger) {
  require(profile.monotonicity == Monotonicity::Decreasing,
          "top-k selection requires decreasing queries");
  require(profile.delta == 1.0, "queries must have delta 1");
  require(k >= 1, "k must be at least 1");
  require(k <= static_cast<int>(true_counts.size()), "k exceeds query count");

  PrivacyBudget per_query = budget.split(k);
  std::vector<double> noisy(true_counts.size());
  for (std::size_t i = 0; i < true_counts.size(); ++i)
    noisy[i] = alap_from_count(true_counts[i], profile, per_query, rng).raw;

  TopKResult result;
  result.entries.reserve(static_cast<std::size_t>(k));
  for (int idx : top_k_indices(noisy, k))
    result.entries.emplace_back(idx, noisy[static_cast<std::size_t>(idx)]);
  // One draw per query at epsilon/k, but the alignment argument certifies a
  // total cost of epsilon: only the k released draws carry the change.
  if (ledger) ledger->record("asymmetric_report_noisy_kmax", budget);
  return result;
}

TopKResult asymmetric_report_noisy_kmax(const std::vector<CountingQuery>& queries,
                                        const Dataset& dataset,
                                        const PrivacyBudget& budget, int k,
                                        RandomSource& rng, BudgetLedger* ledger) {
  SensitivityProfile profile = common_decreasing_profile(queries);
  return asymmetric_report_noisy_kmax_from_counts(evaluate_all(queries, dataset),
                                                  profile, budget, k, rng, ledger);
}

SvtOutput asymmetric_svt_from_counts(const std::vector<double>& true_counts,
                                     const std::vector<double>& thresholds,
                                     const SensitivityProfile& profile,
                                     const PrivacyBudget& budget, int c,
                                     RandomSource& rng, BudgetLedger* ledger) {
  require(!true_counts.empty(), "query list must not be empty");
  require(true_counts.size() == thresholds.size(),
          "thresholds must match queries one-to-one");
  require(c >= 1, "c must be at least 1");
  require(profile.monotonicity == Monotonicity::Decreasing,
          "asymmetric SVT requires decreasing queries");
  require(profile.delta == 1.0, "queries must have delta 1");

  PrivacyBudget per_above = budget.split(c);
  SvtOutput out;
  for (std::size_t i = 0; i < true_counts.size(); ++i) {
    double z = alap_from_count(true_counts[i], profile, per_above, rng).raw;
    if (z >= thresholds[i]) {
      out.answers.push_back(SvtAnswer{SvtAnswer::Kind::Above, z});
      if (++out.above_count >= c) break;
    } else {
      out.answers.push_back(SvtAnswer{SvtAnswer::Kind::Below, std::nullopt});
    }
  }
  if (ledger) ledger->record("asymmetric_svt", budget);
  return out;
}

SvtOutput asymmetric_svt(const std::vector<CountingQuery>& queries,
                         const std::vector<double>& thresholds,
                         const Dataset& dataset, const PrivacyBudget& budget,
                         int c, RandomSource& rng, BudgetLedger* ledger) {
  SensitivityProfile profile = common_decreasing_profile(queries);
  return asymmetric_svt_from_counts(evaluate_all(queries, dataset), thresholds,
                                    profile, budget, c, rng, ledger);
}

TopKResult baseline_report_noisy_argmax_from_counts(
    const std::vector<double>& true_counts, const PrivacyBudget& budget, int k,
    RandomSource& rng, BudgetLedger* ledger) {
  require(!true_counts.empty(), "query list must not be empty");
  require(k >= 1, "k must be at least 1");
  require(k <= static_cast<int>(true_counts.size()), "k exceeds query count");

  // Selection and measurement each get half the budget, split over k.
  PrivacyBudget per_query = budget.split(2 * k);
  std::vector<double> selection_noisy(true_counts.size());
  for (std::size_t i = 0; i < true_counts.size(); ++i)
    selection_noisy[i] = true_counts[i] + sample_laplace(per_query, 1.0, rng);

  std::vector<int> selected = top_k_indices(selection_noisy, k);
  std::vector<double> measured(selected.size());
  for (std::size_t j = 0; j < selected.size(); ++j)
    measured[j] = true_counts[static_cast<std::size_t>(selected[j])] +
                  sample_laplace(per_query, 1.0, rng);

  // Re-sort by the released (measured) value to keep the output contract.
  std::vector<std::size_t> order(selected.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (measured[a] != measured[b]) return measured[a] > measured[b];
    return selected[a] < selected[b];
  });

  TopKResult result;
  result.entries.reserve(order.size());
  for (std::size_t j : order) result.entries.emplace_back(selected[j], measured[j]);
  if (ledger) ledger->record("baseline_report_noisy_argmax", budget);
  return result;
}

TopKResult baseline_report_noisy_argmax(const std::vector<CountingQuery>& queries,
                                        const Dataset& dataset,
                                        const PrivacyBudget& budget, int k,
                                        RandomSource& rng, BudgetLedger* ledger) {
  require(!queries.empty(), "query list must not be empty");
  return baseline_report_noisy_argmax_from_counts(evaluate_all(queries, dataset),
                                                  budget, k, rng, ledger);
}

SvtOutput baseline_svt_from_counts(const std::vector<double>& true_counts,
                                   const std::vector<double>& thresholds,
                                   const PrivacyBudget& budget, int c,
                                   RandomSource& rng,
                                   const BaselineSvtOptions& options,
                                   BudgetLedger* ledger) {
  require(!true_counts.empty(), "query list must not be empty");
  require(true_counts.size() == thresholds.size(),
          "thresholds must match queries one-to-one");
  require(c >= 1, "c must be at least 1");

  PrivacyBudget selection = options.measure_aboves ? budget.split(2) : budget;
  PrivacyBudget threshold_budget = selection.split(2);
  PrivacyBudget per_query = threshold_budget.split(c);
  PrivacyBudget per_measure = budget.split(2 * c);  // used in measure mode only

  // One threshold perturbation for the whole run.
  double rho = sample_laplace(threshold_budget, 1.0, rng);

  SvtOutput out;
  for (std::size_t i = 0; i < true_counts.size(); ++i) {
    double z = true_counts[i] + sample_laplace(per_query, 1.0, rng);
    if (z >= thresholds[i] + rho) {
      SvtAnswer answer{SvtAnswer::Kind::Above, std::nullopt};
      if (options.measure_aboves)
        answer.value = true_counts[i] + sample_laplace(per_measure, 1.0, rng);
      out.answers.push_back(answer);
      if (++out.above_count >= c) break;
    } else {
      out.answers.push_back(SvtAnswer{SvtAnswer::Kind::Below, std::nullopt});
    }
  }
  if (ledger) ledger->record("baseline_svt", budget);
  return out;
}

SvtOutput baseline_svt(const std::vector<CountingQuery>& queries,
                       const std::vector<double>& thresholds, const Dataset& dataset,
                       const PrivacyBudget& budget, int c, RandomSource& rng,
                       const BaselineSvtOptions& options, BudgetLedger* ledger) {
  require(!queries.empty(), "query list must not be empty");
  return baseline_svt_from_counts(evaluate_all(queries, dataset), thresholds,
                                  budget, c, rng, options, ledger);
}

double svt_topk_threshold(const std::vector<double>& true_counts, int k,
                          RandomSource& rng) {
  require(k >= 1, "k must be at least 1");
  require(2 * k <= static_cast<int>(true_counts.size()),
          "threshold rule needs at least 2k queries");
  int pick = k + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k + 1)));
  std::vector<double> sorted = true_counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  return sorted[static_cast<std::size_t>(pick - 1)];  // pick-th largest
}

}  // namespace adp
