#ifndef ADP_LEDGER_HPP
#define ADP_LEDGER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adp/noise.hpp"

namespace adp {

/// Ledger of sequential mechanism runs against one dataset. Sequential
/// composition makes the total spend the sum of the per-run budgets, so the
/// ledger records what each run certifies, not how many noise draws it used.
///
/// A policy fingerprint of 0 means "not stated"; it composes with anything.
class BudgetLedger {
 public:
  struct Entry {
    std::string mechanism;
    double epsilon;
    std::uint64_t policy_fingerprint;
  };

  void record(std::string mechanism, const PrivacyBudget& budget,
              std::uint64_t policy_fingerprint = 0) {
    entries_.push_back(Entry{std::move(mechanism), budget.epsilon(),
                             policy_fingerprint});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  /// Total budget of the recorded sequence. Throws if entries carry two
  /// different (stated) policy fingerprints: composition is only defined for
  /// runs sharing one policy.
  double total_epsilon() const;

 private:
  std::vector<Entry> entries_;
};

}  // namespace adp

#endif  // ADP_LEDGER_HPP
