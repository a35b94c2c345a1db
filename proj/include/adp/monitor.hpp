#ifndef ADP_MONITOR_HPP
#define ADP_MONITOR_HPP

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "adp/noise.hpp"
#include "adp/random.hpp"

namespace adp {

struct VisitRecord {
  std::int64_t user_id = 0;
  std::int64_t location_id = 0;
  std::int64_t timestamp = 0;
};

struct VisitBatch {
  std::vector<VisitRecord> records;
  int batch_index = 0;
};

enum class SafetyVerdict { Safe, Unsafe, Abstain };

struct MonitorEmission {
  int update_index = 0;
  std::int64_t target = 0;  // location id the verdict is about
  SafetyVerdict verdict = SafetyVerdict::Safe;
  double value = 0.0;  // noisy count for Unsafe, otherwise 0
};

/// Streaming safety monitor for a single location over a sliding expiry
/// window. Each update ingests a batch, drops expired records, and either
/// abstains (budget already spent on live records), reports Unsafe with a
/// noisy count, or reports Safe. Safe reports are one-sided exact: the true
/// windowed count is below the threshold whenever Safe is emitted.
class LocationMonitor {
 public:
  /// A record is live while (current_time - timestamp) < expiry_period.
  LocationMonitor(std::int64_t location_id, double threshold,
                  PrivacyBudget epsilon, std::int64_t expiry_period);

  MonitorEmission step(const VisitBatch& batch, RandomSource& rng);

  std::int64_t location_id() const { return location_id_; }
  /// True windowed count for the monitored location, as of the last step.
  std::int64_t true_count() const { return target_count_; }
  std::size_t queue_size() const { return queue_.size(); }
  /// Largest cumulative budget any single queued record has been charged.
  double max_record_spend() const { return max_record_spend_; }

 private:
  struct Queued {
    VisitRecord record;
    bool mark = false;
    double spent = 0.0;
  };

  std::int64_t location_id_;
  double threshold_;
  PrivacyBudget epsilon_;
  std::int64_t expiry_period_;

  std::deque<Queued> queue_;
  std::int64_t target_count_ = 0;
  std::int64_t now_ = 0;
  bool saw_batch_ = false;
  std::int64_t last_batch_max_ = 0;
  int update_index_ = 0;
  int marked_live_ = 0;
  double max_record_spend_ = 0.0;
};

/// Safety monitor over many locations at one designated time. Batches
/// accumulate; each unmarked location is probed with full budget per update
/// (a user occupies at most one location at the designated time, so one
/// record backs at most one probe sequence). Marked locations never emit
/// again.
class MapMonitor {
 public:
  MapMonitor(std::vector<std::int64_t> locations, std::vector<double> thresholds,
             PrivacyBudget epsilon);
  MapMonitor(std::vector<std::int64_t> locations, double threshold,
             PrivacyBudget epsilon);

  /// Appends the batch and emits one verdict per monitored location, in the
  /// constructor's location order. Throws if a user appears twice in the
  /// accumulated data.
  std::vector<MonitorEmission> step(const VisitBatch& batch, RandomSource& rng);

  std::int64_t true_count(std::int64_t location) const;
  bool marked(std::int64_t location) const;
  double max_user_spend() const { return max_user_spend_; }

 private:
  std::vector<std::int64_t> locations_;
  std::vector<double> thresholds_;
  PrivacyBudget epsilon_;

  std::vector<bool> marks_;
  std::unordered_map<std::int64_t, std::int64_t> counts_;
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> users_at_;
  std::unordered_set<std::int64_t> seen_users_;
  std::unordered_map<std::int64_t, double> user_spend_;
  int update_index_ = 0;
  double max_user_spend_ = 0.0;
};

/// Reads newline-delimited `user_id,location_id,timestamp` records grouped
/// into batches: every `batch_size` records when batch_size > 0, otherwise
/// at blank lines. Throws on malformed lines, with the line number.
std::vector<VisitBatch> read_visit_stream(std::istream& in, int batch_size);

/// Writes emissions as `update_index,target,verdict,value` lines.
void write_emissions(std::ostream& out, const std::vector<MonitorEmission>& emissions);

}  // namespace adp

#endif  // ADP_MONITOR_HPP
