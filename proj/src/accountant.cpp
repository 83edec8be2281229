#include "dpcm/privacy/accountant.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "dpcm/money.hpp"
#include "json.hpp"

namespace dpcm {

namespace {

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void PrivacyAccountant::consume(const std::string& query_id,
                                PrivacyParams cost) {
  if (!(cost.epsilon > 0.0)) throw InvalidParams("consume requires epsilon > 0");
  if (cost.delta < 0.0) throw InvalidParams("consume requires delta >= 0");
  std::lock_guard<std::mutex> lock(mutex_);
  const PrivacyParams next = spent_ + cost;
  if (next.epsilon > budget_.epsilon || next.delta > budget_.delta) {
    std::ostringstream msg;
    msg << "privacy budget exhausted by query '" << query_id << "': spent ("
        << spent_.epsilon << ", " << spent_.delta << ") + cost ("
        << cost.epsilon << ", " << cost.delta << ") exceeds budget ("
        << budget_.epsilon << ", " << budget_.delta << ")";
    throw BudgetExhausted(msg.str());
  }
  spent_ = next;
  ledger_.push_back({query_id, cost.epsilon, cost.delta, utc_now_iso8601()});
}

std::string PrivacyAccountant::ledger_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : ledger()) {
    arr.push_back({{"query_id", e.query_id},
                   {"epsilon", e.epsilon},
                   {"delta", e.delta},
                   {"timestamp", e.timestamp}});
  }
  return arr.dump(2);
}

std::string PrivacyAccountant::report() const {
  std::vector<LedgerEntry> entries = ledger();
  const PrivacyParams s = spent();
  std::ostringstream out;
  out << "privacy budget: epsilon=" << format_double_shortest(budget_.epsilon)
      << " delta=" << format_double_shortest(budget_.delta) << "\n";
  out << "spent:          epsilon=" << format_double_shortest(s.epsilon)
      << " delta=" << format_double_shortest(s.delta) << " over "
      << entries.size() << " queries\n";
  out << "remaining:      epsilon="
      << format_double_shortest(budget_.epsilon - s.epsilon)
      << " delta=" << format_double_shortest(budget_.delta - s.delta) << "\n";
  for (const auto& e : entries) {
    out << "  " << e.timestamp << "  eps=" << format_double_shortest(e.epsilon)
        << "  delta=" << format_double_shortest(e.delta) << "  " << e.query_id
        << "\n";
  }
  return out.str();
}

}  // namespace dpcm
