#include "adp/ledger.hpp"

#include <stdexcept>

namespace adp {

double BudgetLedger::total_epsilon() const {
  double total = 0.0;
  std::uint64_t fingerprint = 0;
  for (const Entry& e : entries_) {
    if (e.policy_fingerprint != 0) {
      if (fingerprint != 0 && fingerprint != e.policy_fingerprint)
        throw std::invalid_argument(
            "budget ledger mixes runs under different policies");
      fingerprint = e.policy_fingerprint;
    }
    total += e.epsilon;
  }
  return total;
}

}  // namespace adp
