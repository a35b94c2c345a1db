#include "adp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace adp {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

TopKMetrics metric_topk(const TopKResult& result, const std::vector<double>& truth,
                        int k) {
  require(k >= 1, "k must be at least 1");
  require(k <= static_cast<int>(truth.size()), "k exceeds the number of queries");
  require(static_cast<int>(result.entries.size()) <= k,
          "result carries more than k entries");

  std::vector<int> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&truth](int a, int b) {
                      if (truth[static_cast<std::size_t>(a)] !=
                          truth[static_cast<std::size_t>(b)])
                        return truth[static_cast<std::size_t>(a)] >
                               truth[static_cast<std::size_t>(b)];
                      return a < b;
                    });
  std::unordered_set<int> true_top(order.begin(), order.begin() + k);

  int hits = 0;
  double squared_error = 0.0;
  for (const auto& [index, value] : result.entries) {
    require(index >= 0 && index < static_cast<int>(truth.size()),
            "result index out of range");
    hits += true_top.count(index) != 0;
    double err = value - truth[static_cast<std::size_t>(index)];
    squared_error += err * err;
  }

  TopKMetrics m;
  m.accuracy = static_cast<double>(hits) / static_cast<double>(k);
  m.mse = result.entries.empty()
              ? std::numeric_limits<double>::quiet_NaN()
              : squared_error / static_cast<double>(result.entries.size());
  return m;
}

std::optional<double> metric_fn_ratio(const std::vector<MonitorEmission>& emissions,
                                      const std::vector<double>& true_counts,
                                      const std::vector<double>& thresholds) {
  require(emissions.size() == true_counts.size() &&
              emissions.size() == thresholds.size(),
          "emissions, truths, and thresholds must be parallel");
  std::int64_t wrong_unsafe = 0;
  std::int64_t truly_safe = 0;
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    if (emissions[i].verdict == SafetyVerdict::Abstain) continue;
    if (true_counts[i] >= thresholds[i]) continue;
    ++truly_safe;
    wrong_unsafe += emissions[i].verdict == SafetyVerdict::Unsafe;
  }
  if (truly_safe == 0) return std::nullopt;
  return static_cast<double>(wrong_unsafe) / static_cast<double>(truly_safe);
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& samples,
                                       RandomSource& rng, int resamples,
                                       double level) {
  require(samples.size() >= 2, "bootstrap needs at least two samples");
  require(resamples >= 2, "need at least two resamples");
  require(level > 0.0 && level < 1.0, "confidence level must be in (0,1)");

  std::size_t n = samples.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += samples[rng.next_below(n)];
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  auto quantile = [&means](double q) {
    double pos = q * static_cast<double>(means.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, means.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

}  // namespace adp
