#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "dpcm/privacy/params.hpp"

namespace dpcm {

struct LedgerEntry {
  std::string query_id;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string timestamp;  // ISO-8601 UTC, recorded at consume time
};

/// Tracks privacy spend against a fixed (epsilon, delta) budget under basic
/// sequential composition. The ledger is append-only; consume is the single
/// mutation point and is linearizable (guarded by a mutex), so concurrent
/// consumers observe some serial order and BudgetExhausted is decided against
/// that order.
class PrivacyAccountant {
 public:
  explicit PrivacyAccountant(PrivacyParams budget) : budget_(budget) {
    budget_.validate();
  }

  /// Appends one ledger entry and increases spend. Throws BudgetExhausted,
  /// leaving the accountant unchanged, if the spend would exceed the budget
  /// in either coordinate.
  void consume(const std::string& query_id, PrivacyParams cost);

  PrivacyParams budget() const { return budget_; }

  PrivacyParams spent() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return spent_;
  }

  PrivacyParams remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return {budget_.epsilon - spent_.epsilon, budget_.delta - spent_.delta};
  }

  std::vector<LedgerEntry> ledger() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return ledger_;
  }

  /// Ledger as a JSON array of {query_id, epsilon, delta, timestamp}.
  std::string ledger_json() const;

  /// Human-readable spend-vs-budget report.
  std::string report() const;

 private:
  PrivacyParams budget_;
  PrivacyParams spent_;
  std::vector<LedgerEntry> ledger_;
  mutable std::mutex mutex_;
};

}  // namespace dpcm
