#include "adp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "adp/random.hpp"

namespace adp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::int64_t TransactionDataset::count(int item) const {
  std::int64_t n = 0;
  for (const std::vector<int>& record : records)
    n += std::binary_search(record.begin(), record.end(), item);
  return n;
}

std::vector<double> TransactionDataset::universe_counts() const {
  std::unordered_map<int, std::int64_t> counts;
  counts.reserve(item_universe.size());
  for (const std::vector<int>& record : records)
    for (int item : record) ++counts[item];
  std::vector<double> result;
  result.reserve(item_universe.size());
  for (int item : item_universe) {
    auto it = counts.find(item);
    result.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
  }
  return result;
}

Dataset TransactionDataset::to_dataset() const {
  std::unordered_map<int, int> attribute_of;
  attribute_of.reserve(item_universe.size());
  for (std::size_t i = 0; i < item_universe.size(); ++i)
    attribute_of[item_universe[i]] = static_cast<int>(i);
  Dataset d;
  d.attribute_count = static_cast<int>(item_universe.size());
  d.records.reserve(records.size());
  for (const std::vector<int>& record : records) {
    Record r;
    r.values.assign(item_universe.size(), 0);
    for (int item : record)
      r.values[static_cast<std::size_t>(attribute_of.at(item))] = 1;
    d.records.push_back(std::move(r));
  }
  return d;
}

TransactionDataset load_transactions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open transaction file: " + path);
  TransactionDataset dataset;
  std::set<int> universe;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<int> record;
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      std::size_t consumed = 0;
      long long id = 0;
      try {
        id = std::stoll(token, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != token.size() || id < 0 ||
          id > std::numeric_limits<int>::max())
        throw std::invalid_argument("malformed item id '" + token + "' at line " +
                                    std::to_string(line_number));
      record.push_back(static_cast<int>(id));
    }
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
    for (int item : record) universe.insert(item);
    dataset.records.push_back(std::move(record));
  }
  dataset.item_universe.assign(universe.begin(), universe.end());
  return dataset;
}

void save_transactions(const TransactionDataset& dataset, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const std::vector<int>& record : dataset.records) {
    for (std::size_t i = 0; i < record.size(); ++i) {
      if (i) out << ' ';
      out << record[i];
    }
    out << '\n';
  }
}

TransactionDataset synth_zipf_transactions(int n_records, int n_items,
                                           double zipf_exponent,
                                           std::uint64_t seed) {
  require(n_records >= 0, "n_records must be nonnegative");
  require(n_items >= 1, "n_items must be at least 1");
  require(zipf_exponent > 0.0, "zipf exponent must be positive");

  // Inclusion probability of item i (1-based): 0.9 / i^s.
  std::vector<double> inclusion(static_cast<std::size_t>(n_items));
  for (int i = 0; i < n_items; ++i)
    inclusion[static_cast<std::size_t>(i)] =
        0.9 / std::pow(static_cast<double>(i + 1), zipf_exponent);

  RandomSource rng(seed, /*stream=*/0x21bf);
  TransactionDataset dataset;
  dataset.records.reserve(static_cast<std::size_t>(n_records));
  for (int r = 0; r < n_records; ++r) {
    std::vector<int> record;
    for (int i = 0; i < n_items; ++i)
      if (rng.next_unit_open() < inclusion[static_cast<std::size_t>(i)])
        record.push_back(i + 1);
    dataset.records.push_back(std::move(record));
  }
  dataset.item_universe.resize(static_cast<std::size_t>(n_items));
  for (int i = 0; i < n_items; ++i)
    dataset.item_universe[static_cast<std::size_t>(i)] = i + 1;
  return dataset;
}

std::vector<VisitBatch> TrajectoryDataset::to_batches(int batch_size) const {
  require(batch_size >= 1, "batch size must be at least 1");
  std::vector<VisitBatch> batches;
  for (std::size_t start = 0; start < visits.size();
       start += static_cast<std::size_t>(batch_size)) {
    VisitBatch batch;
    batch.batch_index = static_cast<int>(batches.size());
    std::size_t end = std::min(visits.size(), start + static_cast<std::size_t>(batch_size));
    batch.records.assign(visits.begin() + static_cast<std::ptrdiff_t>(start),
                         visits.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(batch));
  }
  return batches;
}

TrajectoryDataset TrajectoryDataset::first_visit_per_user() const {
  TrajectoryDataset out;
  out.location_universe = location_universe;
  std::unordered_set<std::int64_t> seen;
  for (const VisitRecord& v : visits)
    if (seen.insert(v.user_id).second) out.visits.push_back(v);
  return out;
}

std::int64_t TrajectoryDataset::count_at(std::int64_t location) const {
  std::int64_t n = 0;
  for (const VisitRecord& v : visits) n += v.location_id == location;
  return n;
}

TrajectoryDataset load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  TrajectoryDataset dataset;
  std::set<std::int64_t> universe;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long long user = 0, location = 0, timestamp = 0;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lld%c", &user, &location,
                    &timestamp, &trailing) != 3)
      throw std::invalid_argument("malformed visit record at line " +
                                  std::to_string(line_number));
    universe.insert(location);
    dataset.visits.push_back(VisitRecord{user, location, timestamp});
  }
  dataset.location_universe.assign(universe.begin(), universe.end());
  return dataset;
}

void save_trajectory(const TrajectoryDataset& dataset, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const VisitRecord& v : dataset.visits)
    out << v.user_id << ',' << v.location_id << ',' << v.timestamp << '\n';
}

TrajectoryDataset synth_concentrated_visits(int n_users, int n_locations,
                                            double hot_fraction,
                                            std::uint64_t seed) {
  require(n_users >= 0, "n_users must be nonnegative");
  require(n_locations >= 2, "need at least two locations");
  require(hot_fraction > 0.0 && hot_fraction < 1.0, "hot_fraction must be in (0,1)");

  int n_hot = std::max(1, static_cast<int>(std::lround(hot_fraction * n_locations)));
  n_hot = std::min(n_hot, n_locations - 1);

  // Zipf weights over the hot locations.
  std::vector<double> cdf(static_cast<std::size_t>(n_hot));
  double total = 0.0;
  for (int i = 0; i < n_hot; ++i) {
    total += 1.0 / static_cast<double>(i + 1);
    cdf[static_cast<std::size_t>(i)] = total;
  }
  for (double& c : cdf) c /= total;

  RandomSource rng(seed, /*stream=*/0x7151);
  TrajectoryDataset dataset;
  dataset.visits.reserve(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    std::int64_t location;
    if (rng.next_unit_open() < 0.9) {
      double pick = rng.next_unit_open();
      location = static_cast<std::int64_t>(
          std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    } else {
      location = static_cast<std::int64_t>(n_hot) +
                 static_cast<std::int64_t>(
                     rng.next_below(static_cast<std::uint64_t>(n_locations - n_hot)));
    }
    dataset.visits.push_back(VisitRecord{u, location, u});
  }
  dataset.location_universe.resize(static_cast<std::size_t>(n_locations));
  for (int l = 0; l < n_locations; ++l)
    dataset.location_universe[static_cast<std::size_t>(l)] = l;
  return dataset;
}

}  // namespace adp
