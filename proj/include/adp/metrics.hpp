#ifndef ADP_METRICS_HPP
#define ADP_METRICS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "adp/mechanisms.hpp"
#include "adp/monitor.hpp"
#include "adp/random.hpp"

namespace adp {

struct TopKMetrics {
  double mse = 0.0;
  double accuracy = 0.0;
};

/// Scores a top-k result against true counts: accuracy is the overlap of the
/// returned index set with the true top-k set (ties in the truth broken by
/// ascending index) divided by k; mse averages the squared released-value
/// error over the returned entries. Results may carry fewer than k entries
/// (an aborted SVT run); missing entries count against accuracy and mse is
/// taken over the entries present.
TopKMetrics metric_topk(const TopKResult& result, const std::vector<double>& truth,
                        int k);

/// False-negative ratio over a set of emissions with per-emission ground
/// truth: wrongly-Unsafe emissions over targets whose true count is below
/// their threshold. Abstain emissions are suppressed outputs and are not
/// counted on either side. Absent when no target is truly safe.
std::optional<double> metric_fn_ratio(const std::vector<MonitorEmission>& emissions,
                                      const std::vector<double>& true_counts,
                                      const std::vector<double>& thresholds);

/// Percentile bootstrap confidence interval for the mean.
std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       RandomSource& rng, int resamples = 2000,
                                       double level = 0.95);

}  // namespace adp

#endif  // ADP_METRICS_HPP
