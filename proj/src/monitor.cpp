#include "adp/monitor.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace adp {

namespace {

constexpr SensitivityProfile kVisitCountProfile{1.0, Monotonicity::Decreasing};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

const char* verdict_name(SafetyVerdict v) {
  switch (v) {
    case SafetyVerdict::Safe: return "safe";
    case SafetyVerdict::Unsafe: return "unsafe";
    case SafetyVerdict::Abstain: return "abstain";
  }
  return "?";
}

}  // namespace

LocationMonitor::LocationMonitor(std::int64_t location_id, double threshold,
                                 PrivacyBudget epsilon, std::int64_t expiry_period)
    : location_id_(location_id),
      threshold_(threshold),
      epsilon_(epsilon),
      expiry_period_(expiry_period) {
  require(expiry_period >= 1, "expiry period must be at least 1 time unit");
}

MonitorEmission LocationMonitor::step(const VisitBatch& batch, RandomSource& rng) {
  // Batches must not move backwards in time.
  std::int64_t batch_min = 0, batch_max = 0;
  if (!batch.records.empty()) {
    batch_min = batch_max = batch.records.front().timestamp;
    for (const VisitRecord& r : batch.records) {
      batch_min = std::min(batch_min, r.timestamp);
      batch_max = std::max(batch_max, r.timestamp);
    }
    if (saw_batch_ && batch_min < last_batch_max_)
      throw std::invalid_argument("out-of-order batch: timestamp precedes previous batch");
    saw_batch_ = true;
    last_batch_max_ = batch_max;
    now_ = std::max(now_, batch_max);
  }

  for (const VisitRecord& r : batch.records) {
    queue_.push_back(Queued{r, false, 0.0});
    if (r.location_id == location_id_) ++target_count_;
  }

  // Timestamps are nondecreasing across batches, so the front is oldest.
  while (!queue_.empty() &&
         now_ - queue_.front().record.timestamp >= expiry_period_) {
    const Queued& front = queue_.front();
    if (front.record.location_id == location_id_) --target_count_;
    if (front.mark) --marked_live_;
    queue_.pop_front();
  }

  int index = update_index_++;
  if (marked_live_ > 0)
    return MonitorEmission{index, location_id_, SafetyVerdict::Abstain, 0.0};

  double z = alap_from_count(static_cast<double>(target_count_),
                             kVisitCountProfile, epsilon_, rng)
                 .raw;
  if (z >= threshold_) {
    // Marking records the budget spend; no further output derives from these
    // records until they all expire.
    for (Queued& q : queue_) {
      q.mark = true;
      q.spent += epsilon_.epsilon();
      max_record_spend_ = std::max(max_record_spend_, q.spent);
    }
    marked_live_ = static_cast<int>(queue_.size());
    return MonitorEmission{index, location_id_, SafetyVerdict::Unsafe, z};
  }
  return MonitorEmission{index, location_id_, SafetyVerdict::Safe, 0.0};
}

MapMonitor::MapMonitor(std::vector<std::int64_t> locations,
                       std::vector<double> thresholds, PrivacyBudget epsilon)
    : locations_(std::move(locations)),
      thresholds_(std::move(thresholds)),
      epsilon_(epsilon),
      marks_(locations_.size(), false) {
  require(!locations_.empty(), "need at least one location to monitor");
  require(locations_.size() == thresholds_.size(),
          "one threshold per monitored location");
}

MapMonitor::MapMonitor(std::vector<std::int64_t> locations, double threshold,
                       PrivacyBudget epsilon)
    : MapMonitor(locations, std::vector<double>(locations.size(), threshold),
                 epsilon) {}

std::vector<MonitorEmission> MapMonitor::step(const VisitBatch& batch,
                                              RandomSource& rng) {
  for (const VisitRecord& r : batch.records) {
    if (!seen_users_.insert(r.user_id).second)
      throw std::invalid_argument(
          "duplicate user " + std::to_string(r.user_id) +
          ": one visit per user at the designated time");
    ++counts_[r.location_id];
    users_at_[r.location_id].push_back(r.user_id);
  }

  int index = update_index_++;
  std::vector<MonitorEmission> emissions;
  emissions.reserve(locations_.size());
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    std::int64_t location = locations_[i];
    if (marks_[i]) {
      emissions.push_back({index, location, SafetyVerdict::Abstain, 0.0});
      continue;
    }
    auto it = counts_.find(location);
    double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
    double z = alap_from_count(count, kVisitCountProfile, epsilon_, rng).raw;
    if (z >= thresholds_[i]) {
      marks_[i] = true;
      for (std::int64_t user : users_at_[location]) {
        double& spent = user_spend_[user];
        spent += epsilon_.epsilon();
        max_user_spend_ = std::max(max_user_spend_, spent);
      }
      emissions.push_back({index, location, SafetyVerdict::Unsafe, z});
    } else {
      emissions.push_back({index, location, SafetyVerdict::Safe, 0.0});
    }
  }
  return emissions;
}

std::int64_t MapMonitor::true_count(std::int64_t location) const {
  auto it = counts_.find(location);
  return it == counts_.end() ? 0 : it->second;
}

bool MapMonitor::marked(std::int64_t location) const {
  for (std::size_t i = 0; i < locations_.size(); ++i)
    if (locations_[i] == location) return marks_[i];
  return false;
}

std::vector<VisitBatch> read_visit_stream(std::istream& in, int batch_size) {
  std::vector<VisitBatch> batches;
  VisitBatch current;
  auto flush = [&] {
    if (current.records.empty()) return;
    current.batch_index = static_cast<int>(batches.size());
    batches.push_back(std::move(current));
    current = VisitBatch{};
  };

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (batch_size <= 0) flush();
      continue;
    }
    long long user = 0, location = 0, timestamp = 0;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lld%c", &user, &location,
                    &timestamp, &trailing) != 3)
      throw std::invalid_argument("malformed visit record at line " +
                                  std::to_string(line_number));
    current.records.push_back(VisitRecord{user, location, timestamp});
    if (batch_size > 0 && static_cast<int>(current.records.size()) == batch_size)
      flush();
  }
  flush();
  return batches;
}

void write_emissions(std::ostream& out, const std::vector<MonitorEmission>& emissions) {
  char buffer[128];
  for (const MonitorEmission& e : emissions) {
    std::snprintf(buffer, sizeof(buffer), "%d,%lld,%s,%.12g\n", e.update_index,
                  static_cast<long long>(e.target), verdict_name(e.verdict),
                  e.value);
    out << buffer;
  }
}

}  // namespace adp
