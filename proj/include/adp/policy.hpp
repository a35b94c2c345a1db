#ifndef ADP_POLICY_HPP
#define ADP_POLICY_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adp {

/// Raised when a neighbor enumeration or search exceeds its configured cap.
struct EnumerationLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumerationCaps {
  std::size_t max_record_neighbors = 4096;
  std::size_t max_search_nodes = 100000;
};

/// A record is a fixed-length vector of binary attribute values.
struct Record {
  std::vector<std::uint8_t> values;

  Record() = default;
  explicit Record(std::vector<std::uint8_t> v);

  int attribute_count() const { return static_cast<int>(values.size()); }
  bool operator==(const Record&) const = default;
};

/// An ordered multiset of records over a shared attribute universe. Ordering
/// is stable: an index identifies the same logical record across neighbor
/// construction.
struct Dataset {
  std::vector<Record> records;
  int attribute_count = 0;

  Dataset() = default;
  Dataset(std::vector<Record> recs, int attributes);

  int record_count() const { return static_cast<int>(records.size()); }
  bool operator==(const Dataset&) const = default;
};

/// Per-attribute sensitivity classifier. For each attribute it answers
/// whether a given value (0 or 1) is sensitive. Sensitive values may be
/// swapped freely when forming neighbors; non-sensitive values are pinned.
class Policy {
 public:
  struct AttributeRule {
    bool zero_sensitive = true;
    bool one_sensitive = true;
  };

  explicit Policy(std::vector<AttributeRule> rules) : rules_(std::move(rules)) {}

  /// Everything sensitive: the neighboring relation of standard DP.
  static Policy all_sensitive(int attribute_count);
  /// Visits are sensitive, absences are not: P(1)=1, P(0)=0 per attribute.
  static Policy visited_sensitive(int attribute_count);
  /// Nothing sensitive: no record has any neighbor besides itself.
  static Policy none_sensitive(int attribute_count);

  int attribute_count() const { return static_cast<int>(rules_.size()); }

  bool sensitive(int attribute, std::uint8_t value) const {
    const AttributeRule& r = rules_.at(static_cast<std::size_t>(attribute));
    return value ? r.one_sensitive : r.zero_sensitive;
  }

  /// Stable identifier of the rule table, used by budget ledgers to detect
  /// accidental mixing of runs under different policies.
  std::uint64_t fingerprint() const;

 private:
  std::vector<AttributeRule> rules_;
};

enum class Monotonicity { Decreasing, Increasing, NonMonotone };

std::string to_string(Monotonicity mono);

/// Sensitivity of a query under a policy: the worst-case answer change over
/// the policy's neighboring relation, plus the direction of that change.
struct SensitivityProfile {
  double delta = 1.0;
  Monotonicity monotonicity = Monotonicity::Decreasing;
};

/// Counts records whose value at `attribute_index` equals `target`.
struct CountingQuery {
  int attribute_index = 0;
  std::uint8_t target = 1;
  SensitivityProfile profile;

  std::int64_t evaluate(const Dataset& dataset) const;
};

/// Builds a counting query with its profile classified under `policy`.
CountingQuery make_counting_query(int attribute_index, const Policy& policy,
                                  std::uint8_t target = 1);

/// All records r' such that r is policy-neighboring to r': r' agrees with r
/// on every non-sensitive value of r and is free elsewhere. Includes r
/// itself. Size is 2^(#sensitive values of r); guarded by caps.
std::vector<Record> p_neighbors_record(const Record& r, const Policy& policy,
                                       const EnumerationCaps& caps = {});

/// True iff r is policy-neighboring to r_prime (directional).
bool is_p_neighbor_record(const Record& r, const Record& r_prime,
                          const Policy& policy);

/// True iff d is policy-neighboring to d_prime: at most one record index
/// differs, and the differing pair satisfies the record-level relation in
/// the d -> d_prime direction. Identical datasets qualify (zero-change case).
bool is_p_neighbor_dataset(const Dataset& d, const Dataset& d_prime,
                           const Policy& policy);

/// Enumerates the neighboring datasets of d (replacement semantics: one
/// record swapped for one of its record-level neighbors). The identity
/// dataset is included unless `include_identity` is false.
std::vector<Dataset> p_neighbor_datasets(const Dataset& d, const Policy& policy,
                                         const EnumerationCaps& caps = {},
                                         bool include_identity = true);

/// Analytic sensitivity classification of a counting query under a policy.
SensitivityProfile classify_sensitivity(const CountingQuery& query,
                                        const Policy& policy);

/// Exhaustive cross-check of classify_sensitivity: enumerates every dataset
/// with `record_count` records over the policy's attribute universe together
/// with all of its neighbors, and classifies from the observed answer
/// changes. Tiny instances only.
SensitivityProfile classify_sensitivity_brute_force(
    const CountingQuery& query, const Policy& policy, int record_count,
    const EnumerationCaps& caps = {});

/// Smallest k such that a chain d = D_0, D_1 in N_P(D_0), ..., D_k flips
/// `predicate`. Breadth-first search over the neighbor graph; throws
/// EnumerationLimitError if no flip is reachable within `max_steps` or the
/// node cap is exceeded.
int min_step(const Dataset& d, const std::function<bool(const Dataset&)>& predicate,
             const Policy& policy, int max_steps,
             const EnumerationCaps& caps = {});

}  // namespace adp

#endif  // ADP_POLICY_HPP
