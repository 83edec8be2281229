#include "dpcm/data/loan.hpp"

#include <cmath>

namespace dpcm {

namespace {

const std::array<std::string, 4> kHomeOwnership = {"RENT", "OWN", "MORTGAGE",
                                                   "OTHER"};

const std::array<std::string, 14> kPurpose = {
    "debt_consolidation", "credit_card", "home_improvement", "house",
    "major_purchase",      "small_business", "car",          "medical",
    "moving",              "vacation",       "wedding",      "renewable_energy",
    "educational",         "other"};

const std::array<std::string, 6> kLoanStatus = {
    "FULLY_PAID", "CURRENT", "CHARGED_OFF", "DEFAULT", "LATE", "IN_GRACE"};

}  // namespace

const std::string& to_string(HomeOwnership v) {
  return kHomeOwnership[static_cast<int>(v)];
}

const std::string& to_string(Purpose v) { return kPurpose[static_cast<int>(v)]; }

const std::string& to_string(LoanStatus v) {
  return kLoanStatus[static_cast<int>(v)];
}

std::optional<HomeOwnership> home_ownership_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kHomeOwnership.size(); ++i)
    if (kHomeOwnership[i] == s) return static_cast<HomeOwnership>(i);
  // Lending Club exports carry NONE/ANY in rare rows; both fold into the
  // catch-all bucket the binning tables use.
  if (s == "NONE" || s == "ANY") return HomeOwnership::Other;
  return std::nullopt;
}

std::optional<Purpose> purpose_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kPurpose.size(); ++i)
    if (kPurpose[i] == s) return static_cast<Purpose>(i);
  return std::nullopt;
}

std::optional<LoanStatus> loan_status_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kLoanStatus.size(); ++i)
    if (kLoanStatus[i] == s) return static_cast<LoanStatus>(i);
  return std::nullopt;
}

std::string validate_record(const LoanRecord& r) {
  if (r.member_id.empty()) return "member_id is empty";
  if (r.loan_amount < 0) return "loan_amount is negative";
  if (r.total_funded_amount <= 0) return "total_funded_amount must be positive";
  if (r.term_months != 36 && r.term_months != 60)
    return "term_months must be 36 or 60";
  if (!std::isfinite(r.interest_rate) || r.interest_rate < 0.0)
    return "interest_rate must be a nonnegative number";
  if (r.annual_income && *r.annual_income < 0)
    return "annual_income is negative";
  if (r.dti && (!std::isfinite(*r.dti) || *r.dti < 0.0))
    return "dti must be a nonnegative number";
  if (r.state.size() != 2) return "state must be a 2-letter code";
  if (r.total_recovered_principal < 0)
    return "total_recovered_principal is negative";
  if (r.total_recovered_principal > r.total_funded_amount)
    return "total_recovered_principal exceeds total_funded_amount";
  if (r.recoveries < 0) return "recoveries is negative";
  return {};
}

const std::array<std::string, 14>& csv_schema_columns() {
  static const std::array<std::string, 14> cols = {
      "member_id",       "loan_amount",
      "total_funded_amount", "term_months",
      "interest_rate",   "annual_income",
      "dti",             "state",
      "zip_code",        "home_ownership",
      "purpose",         "loan_status",
      "total_recovered_principal", "recoveries"};
  return cols;
}

}  // namespace dpcm
