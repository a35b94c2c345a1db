#ifndef ADP_MECHANISMS_HPP
#define ADP_MECHANISMS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "adp/ledger.hpp"
#include "adp/noise.hpp"
#include "adp/policy.hpp"
#include "adp/random.hpp"

namespace adp {

enum class Verdict { BelowThreshold, AboveThreshold };

/// Threshold decision. `otp` marks the verdict as the one-sided-exact side:
/// such verdicts are never wrong (for a Decreasing query, BelowThreshold is
/// only ever emitted when the true count is below the threshold).
struct DecisionVerdict {
  Verdict verdict;
  bool otp;
};

/// Top-k selection output: (query index, noisy value) pairs sorted by noisy
/// value descending, ties broken by ascending index.
struct TopKResult {
  std::vector<std::pair<int, double>> entries;
};

/// Per-query sparse-vector answer. Below answers carry no value; Above
/// answers carry the released noisy count when the mechanism produces one.
struct SvtAnswer {
  enum class Kind { Below, Above };
  Kind kind = Kind::Below;
  std::optional<double> value;
};

struct SvtOutput {
  std::vector<SvtAnswer> answers;  // one per processed query; stops at abort
  int above_count = 0;
};

/// Decides whether the query answer is below the threshold using one noisy
/// draw. Requires a monotone profile; the one-sided side is exact. Rejects
/// NonMonotone profiles, which admit no one-sided guarantee.
DecisionVerdict decision_below_threshold(const CountingQuery& query,
                                         const Dataset& dataset, double threshold,
                                         const PrivacyBudget& budget,
                                         RandomSource& rng,
                                         BudgetLedger* ledger = nullptr);

DecisionVerdict decision_below_threshold_from_count(
    double true_count, const SensitivityProfile& profile, double threshold,
    const PrivacyBudget& budget, RandomSource& rng, BudgetLedger* ledger = nullptr);

/// Asymmetric report-noisy-k-max: perturbs every query with one-sided noise
/// at budget epsilon/k and returns the k largest noisy values with their
/// indices. Total certified cost is epsilon. All queries must be Decreasing
/// with delta 1.
TopKResult asymmetric_report_noisy_kmax(const std::vector<CountingQuery>& queries,
                                        const Dataset& dataset,
                                        const PrivacyBudget& budget, int k,
                                        RandomSource& rng,
                                        BudgetLedger* ledger = nullptr);

TopKResult asymmetric_report_noisy_kmax_from_counts(
    const std::vector<double>& true_counts, const SensitivityProfile& profile,
    const PrivacyBudget& budget, int k, RandomSource& rng,
    BudgetLedger* ledger = nullptr);

/// Asymmetric sparse vector technique: thresholds receive no noise; each
/// query is answered with a one-sided noisy draw at budget epsilon/c. Above
/// answers release the draw itself and consume budget; processing aborts
/// after c of them. Below answers are free and exact.
SvtOutput asymmetric_svt(const std::vector<CountingQuery>& queries,
                         const std::vector<double>& thresholds,
                         const Dataset& dataset, const PrivacyBudget& budget,
                         int c, RandomSource& rng, BudgetLedger* ledger = nullptr);

SvtOutput asymmetric_svt_from_counts(const std::vector<double>& true_counts,
                                     const std::vector<double>& thresholds,
                                     const SensitivityProfile& profile,
                                     const PrivacyBudget& budget, int c,
                                     RandomSource& rng,
                                     BudgetLedger* ledger = nullptr);

/// DP baseline for top-k: half the budget selects (per-query Laplace at
/// epsilon/(2k)), the other half measures the k selected counts (Laplace at
/// epsilon/(2k) each). Entries carry the measured values.
TopKResult baseline_report_noisy_argmax(const std::vector<CountingQuery>& queries,
                                        const Dataset& dataset,
                                        const PrivacyBudget& budget, int k,
                                        RandomSource& rng,
                                        BudgetLedger* ledger = nullptr);

TopKResult baseline_report_noisy_argmax_from_counts(
    const std::vector<double>& true_counts, const PrivacyBudget& budget, int k,
    RandomSource& rng, BudgetLedger* ledger = nullptr);

struct BaselineSvtOptions {
  /// When true, spends half the budget on Laplace measurements of the Above
  /// answers and runs selection at the remaining half.
  bool measure_aboves = false;
};

/// Standard DP sparse vector technique: Laplace noise on the threshold
/// (half the selection budget) and on each query answer (the other half,
/// split over c). Above answers carry a value only in measure mode.
SvtOutput baseline_svt(const std::vector<CountingQuery>& queries,
                       const std::vector<double>& thresholds, const Dataset& dataset,
                       const PrivacyBudget& budget, int c, RandomSource& rng,
                       const BaselineSvtOptions& options = {},
                       BudgetLedger* ledger = nullptr);

SvtOutput baseline_svt_from_counts(const std::vector<double>& true_counts,
                                   const std::vector<double>& thresholds,
                                   const PrivacyBudget& budget, int c,
                                   RandomSource& rng,
                                   const BaselineSvtOptions& options = {},
                                   BudgetLedger* ledger = nullptr);

/// Threshold-selection rule for running SVT as a top-k mechanism: draw an
/// integer i uniformly from [k, 2k] and use the i-th largest true count.
double svt_topk_threshold(const std::vector<double>& true_counts, int k,
                          RandomSource& rng);

}  // namespace adp

#endif  // ADP_MECHANISMS_HPP
