#include "adp/policy.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace adp {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string serialize(const Dataset& d) {
  std::string key;
  key.reserve(static_cast<std::size_t>(d.record_count()) *
              static_cast<std::size_t>(d.attribute_count));
  for (const Record& r : d.records)
    key.append(r.values.begin(), r.values.end());
  return key;
}

}  // namespace

Record::Record(std::vector<std::uint8_t> v) : values(std::move(v)) {
  for (std::uint8_t x : values) require(x <= 1, "record values must be 0 or 1");
}

Dataset::Dataset(std::vector<Record> recs, int attributes)
    : records(std::move(recs)), attribute_count(attributes) {
  require(attributes >= 0, "attribute_count must be nonnegative");
  for (const Record& r : records)
    require(r.attribute_count() == attributes,
            "all records must share the dataset's attribute count");
}

Policy Policy::all_sensitive(int attribute_count) {
  return Policy(std::vector<AttributeRule>(
      static_cast<std::size_t>(attribute_count), AttributeRule{true, true}));
}

Policy Policy::visited_sensitive(int attribute_count) {
  return Policy(std::vector<AttributeRule>(
      static_cast<std::size_t>(attribute_count), AttributeRule{false, true}));
}

Policy Policy::none_sensitive(int attribute_count) {
  return Policy(std::vector<AttributeRule>(
      static_cast<std::size_t>(attribute_count), AttributeRule{false, false}));
}

std::uint64_t Policy::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto feed = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  feed(static_cast<std::uint64_t>(rules_.size()));
  for (const AttributeRule& r : rules_)
    feed(static_cast<std::uint64_t>(r.zero_sensitive) |
         (static_cast<std::uint64_t>(r.one_sensitive) << 1));
  return h;
}

std::string to_string(Monotonicity mono) {
  switch (mono) {
    case Monotonicity::Decreasing: return "decreasing";
    case Monotonicity::Increasing: return "increasing";
    case Monotonicity::NonMonotone: return "non-monotone";
  }
  return "?";
}

std::int64_t CountingQuery::evaluate(const Dataset& dataset) const {
  require(attribute_index >= 0 && attribute_index < dataset.attribute_count,
          "attribute_index out of range for dataset");
  std::int64_t count = 0;
  for (const Record& r : dataset.records)
    count += r.values[static_cast<std::size_t>(attribute_index)] == target;
  return count;
}

CountingQuery make_counting_query(int attribute_index, const Policy& policy,
                                  std::uint8_t target) {
  require(attribute_index >= 0 && attribute_index < policy.attribute_count(),
          "attribute_index out of range for policy");
  require(target <= 1, "target value must be 0 or 1");
  CountingQuery q;
  q.attribute_index = attribute_index;
  q.target = target;
  q.profile = classify_sensitivity(q, policy);
  return q;
}

std::vector<Record> p_neighbors_record(const Record& r, const Policy& policy,
                                       const EnumerationCaps& caps) {
  require(r.attribute_count() == policy.attribute_count(),
          "record and policy attribute counts differ");
  std::vector<int> free_positions;
  for (int i = 0; i < r.attribute_count(); ++i)
    if (policy.sensitive(i, r.values[static_cast<std::size_t>(i)]))
      free_positions.push_back(i);

  if (free_positions.size() >= 63 ||
      (std::size_t{1} << free_positions.size()) > caps.max_record_neighbors)
    throw EnumerationLimitError(
        "combinatorial blowup: record has too many sensitive values to "
        "enumerate neighbors");

  std::vector<Record> result;
  result.reserve(std::size_t{1} << free_positions.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_positions.size());
       ++mask) {
    Record neighbor = r;
    for (std::size_t b = 0; b < free_positions.size(); ++b)
      neighbor.values[static_cast<std::size_t>(free_positions[b])] =
          static_cast<std::uint8_t>((mask >> b) & 1);
    result.push_back(std::move(neighbor));
  }
  return result;
}

bool is_p_neighbor_record(const Record& r, const Record& r_prime,
                          const Policy& policy) {
  require(r.attribute_count() == policy.attribute_count() &&
              r_prime.attribute_count() == policy.attribute_count(),
          "record and policy attribute counts differ");
  for (int i = 0; i < r.attribute_count(); ++i) {
    std::uint8_t v = r.values[static_cast<std::size_t>(i)];
    if (!policy.sensitive(i, v) && r_prime.values[static_cast<std::size_t>(i)] != v)
      return false;
  }
  return true;
}

bool is_p_neighbor_dataset(const Dataset& d, const Dataset& d_prime,
                           const Policy& policy) {
  require(d.attribute_count == d_prime.attribute_count &&
              d.attribute_count == policy.attribute_count(),
          "dataset/policy attribute counts differ");
  require(d.record_count() == d_prime.record_count(),
          "neighboring uses replacement semantics: record counts must match");
  int differing = -1;
  for (int i = 0; i < d.record_count(); ++i) {
    if (d.records[static_cast<std::size_t>(i)] ==
        d_prime.records[static_cast<std::size_t>(i)])
      continue;
    if (differing >= 0) return false;  // more than one record changed
    differing = i;
  }
  if (differing < 0) return true;  // zero-change case
  return is_p_neighbor_record(d.records[static_cast<std::size_t>(differing)],
                              d_prime.records[static_cast<std::size_t>(differing)],
                              policy);
}

std::vector<Dataset> p_neighbor_datasets(const Dataset& d, const Policy& policy,
                                         const EnumerationCaps& caps,
                                         bool include_identity) {
  require(d.attribute_count == policy.attribute_count(),
          "dataset and policy attribute counts differ");
  std::vector<Dataset> result;
  if (include_identity) result.push_back(d);
  for (int i = 0; i < d.record_count(); ++i) {
    const Record& r = d.records[static_cast<std::size_t>(i)];
    for (Record& neighbor : p_neighbors_record(r, policy, caps)) {
      if (neighbor == r) continue;
      Dataset candidate = d;
      candidate.records[static_cast<std::size_t>(i)] = std::move(neighbor);
      result.push_back(std::move(candidate));
      if (result.size() > caps.max_search_nodes)
        throw EnumerationLimitError(
            "combinatorial blowup: too many neighboring datasets");
    }
  }
  return result;
}

SensitivityProfile classify_sensitivity(const CountingQuery& query,
                                        const Policy& policy) {
  require(query.attribute_index >= 0 &&
              query.attribute_index < policy.attribute_count(),
          "attribute_index out of range for policy");
  require(query.target <= 1, "target value must be 0 or 1");
  // A neighbor swap at this attribute can remove a counted record only if
  // the counted value is sensitive, and add one only if the opposite value
  // is sensitive.
  bool can_decrease = policy.sensitive(query.attribute_index, query.target);
  bool can_increase = policy.sensitive(query.attribute_index,
                                       static_cast<std::uint8_t>(1 - query.target));
  if (!can_decrease && !can_increase)
    return SensitivityProfile{0.0, Monotonicity::Decreasing};  // vacuously monotone
  if (can_decrease && can_increase)
    return SensitivityProfile{1.0, Monotonicity::NonMonotone};
  return SensitivityProfile{1.0, can_decrease ? Monotonicity::Decreasing
                                              : Monotonicity::Increasing};
}

SensitivityProfile classify_sensitivity_brute_force(const CountingQuery& query,
                                                    const Policy& policy,
                                                    int record_count,
                                                    const EnumerationCaps& caps) {
  require(record_count >= 1, "record_count must be positive");
  int d = policy.attribute_count();
  std::size_t bits = static_cast<std::size_t>(record_count) * static_cast<std::size_t>(d);
  if (bits >= 63 || (std::size_t{1} << bits) > caps.max_search_nodes)
    throw EnumerationLimitError(
        "combinatorial blowup: dataset universe too large to enumerate");

  double max_change = 0.0;
  bool saw_increase = false;
  bool saw_decrease = false;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    Dataset base;
    base.attribute_count = d;
    base.records.reserve(static_cast<std::size_t>(record_count));
    for (int r = 0; r < record_count; ++r) {
      Record rec;
      rec.values.resize(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a)
        rec.values[static_cast<std::size_t>(a)] =
            static_cast<std::uint8_t>((code >> (r * d + a)) & 1);
      base.records.push_back(std::move(rec));
    }
    std::int64_t f_base = query.evaluate(base);
    for (const Dataset& neighbor : p_neighbor_datasets(base, policy, caps, false)) {
      std::int64_t diff = query.evaluate(neighbor) - f_base;
      max_change = std::max(max_change, static_cast<double>(std::abs(diff)));
      saw_increase |= diff > 0;
      saw_decrease |= diff < 0;
    }
  }
  if (!saw_increase && !saw_decrease)
    return SensitivityProfile{0.0, Monotonicity::Decreasing};
  if (saw_increase && saw_decrease)
    return SensitivityProfile{max_change, Monotonicity::NonMonotone};
  return SensitivityProfile{max_change, saw_decrease ? Monotonicity::Decreasing
                                                     : Monotonicity::Increasing};
}

int min_step(const Dataset& d, const std::function<bool(const Dataset&)>& predicate,
             const Policy& policy, int max_steps, const EnumerationCaps& caps) {
  require(max_steps >= 0, "max_steps must be nonnegative");
  bool base_answer = predicate(d);
  std::unordered_set<std::string> visited{serialize(d)};
  std::deque<std::pair<Dataset, int>> frontier{{d, 0}};
  while (!frontier.empty()) {
    auto [current, depth] = std::move(frontier.front());
    frontier.pop_front();
    if (depth >= max_steps) continue;
    for (Dataset& neighbor : p_neighbor_datasets(current, policy, caps, false)) {
      std::string key = serialize(neighbor);
      if (!visited.insert(std::move(key)).second) continue;
      if (visited.size() > caps.max_search_nodes)
        throw EnumerationLimitError("combinatorial blowup: search node cap exceeded");
      if (predicate(neighbor) != base_answer) return depth + 1;
      frontier.emplace_back(std::move(neighbor), depth + 1);
    }
  }
  throw EnumerationLimitError("unreachable within cap: predicate never flips");
}

}  // namespace adp
