#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dpcm/money.hpp"

namespace dpcm {

enum class HomeOwnership { Rent, Own, Mortgage, Other };

// The fourteen Lending Club purpose labels.
enum class Purpose {
  DebtConsolidation,
  CreditCard,
  HomeImprovement,
  House,
  MajorPurchase,
  SmallBusiness,
  Car,
  Medical,
  Moving,
  Vacation,
  Wedding,
  RenewableEnergy,
  Educational,
  Other
};

enum class LoanStatus { FullyPaid, Current, ChargedOff, Default, Late, InGrace };

inline constexpr int kPurposeCount = 14;

const std::string& to_string(HomeOwnership v);
const std::string& to_string(Purpose v);
const std::string& to_string(LoanStatus v);

std::optional<HomeOwnership> home_ownership_from_string(const std::string& s);
std::optional<Purpose> purpose_from_string(const std::string& s);
std::optional<LoanStatus> loan_status_from_string(const std::string& s);

/// One borrower/loan row. annual_income and dti may be missing (treated as
/// nulls by the preprocessing pipeline); every other field is required.
struct LoanRecord {
  std::string member_id;
  Cents loan_amount = 0;
  Cents total_funded_amount = 0;
  int term_months = 36;  // 36 or 60
  double interest_rate = 0.0;
  std::optional<Cents> annual_income;
  std::optional<double> dti;
  std::string state;  // 2-letter code
  std::string zip_code;
  HomeOwnership home_ownership = HomeOwnership::Other;
  Purpose purpose = Purpose::Other;
  LoanStatus loan_status = LoanStatus::Current;
  Cents total_recovered_principal = 0;
  Cents recoveries = 0;
};

inline bool is_defaulted(LoanStatus s) {
  return s == LoanStatus::ChargedOff || s == LoanStatus::Default;
}

inline bool is_defaulted(const LoanRecord& r) {
  return is_defaulted(r.loan_status);
}

/// Empty string when the record satisfies every schema invariant, otherwise
/// a description of the first violation.
std::string validate_record(const LoanRecord& r);

enum class Provenance { Csv, Synthetic };

struct Dataset {
  std::vector<LoanRecord> records;
  std::string schema_version = "1";
  Provenance provenance = Provenance::Synthetic;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Exact header names, in on-disk column order.
const std::array<std::string, 14>& csv_schema_columns();

}  // namespace dpcm
