#ifndef ADP_DATA_HPP
#define ADP_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adp/monitor.hpp"
#include "adp/policy.hpp"

namespace adp {

/// Transaction data in the frequent-itemset interchange format: one record
/// per line, whitespace-separated integer item ids.
struct TransactionDataset {
  std::vector<std::vector<int>> records;  // sorted unique ids per record
  std::vector<int> item_universe;         // sorted unique

  std::int64_t count(int item) const;
  /// Per-item counts in item_universe order.
  std::vector<double> universe_counts() const;
  /// Binary attribute view: attribute i is "record contains the i-th
  /// universe item". Intended for small instances.
  Dataset to_dataset() const;
};

TransactionDataset load_transactions(const std::string& path);
void save_transactions(const TransactionDataset& dataset, const std::string& path);

/// Synthetic click-stream-shaped data: item i appears in a record with
/// probability proportional to 1/i^exponent (heavy head, long tail).
TransactionDataset synth_zipf_transactions(int n_records, int n_items,
                                           double zipf_exponent,
                                           std::uint64_t seed);

/// Visit data: one (user, location, timestamp) triple per line,
/// comma-separated.
struct TrajectoryDataset {
  std::vector<VisitRecord> visits;
  std::vector<std::int64_t> location_universe;

  /// Consecutive fixed-size batches in visit order.
  std::vector<VisitBatch> to_batches(int batch_size) const;
  /// Keeps each user's first visit only (designated-time semantics).
  TrajectoryDataset first_visit_per_user() const;
  std::int64_t count_at(std::int64_t location) const;
};

TrajectoryDataset load_trajectory(const std::string& path);
void save_trajectory(const TrajectoryDataset& dataset, const std::string& path);

/// Synthetic visit data with counts concentrated on a small hot fraction of
/// locations; most locations receive no visits. One visit per user,
/// timestamps increasing with user id.
TrajectoryDataset synth_concentrated_visits(int n_users, int n_locations,
                                            double hot_fraction,
                                            std::uint64_t seed);

}  // namespace adp

#endif  // ADP_DATA_HPP
