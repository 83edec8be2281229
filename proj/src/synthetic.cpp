#include "dpcm/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dpcm/errors.hpp"
#include "dpcm/rng.hpp"

namespace dpcm {

namespace {

constexpr std::uint64_t kFeatureStream = 0x5179F3A1D0000000ULL;
constexpr std::uint64_t kOutcomeStream = 0xA60B7E42C0000000ULL;

const char* kStates[] = {
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA", "HI",
    "ID", "IL", "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN",
    "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH",
    "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA",
    "WV", "WI", "WY"};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

int pick_weighted(Rng& rng, const double* weights, int count) {
  double total = 0.0;
  for (int i = 0; i < count; ++i) total += weights[i];
  double draw = rng.uniform01() * total;
  for (int i = 0; i < count; ++i) {
    draw -= weights[i];
    if (draw < 0.0) return i;
  }
  return count - 1;
}

struct Draft {
  LoanRecord record;
  double risk = 0.0;  // latent score, higher = riskier
};

Draft draw_features(std::size_t index, const SyntheticConfig& cfg) {
  Rng rng = Rng::derived(cfg.seed, kFeatureStream + index);
  Draft d;
  LoanRecord& r = d.record;

  char id[24];
  std::snprintf(id, sizeof(id), "SYN-%08zu", index + 1);
  r.member_id = id;

  r.state = kStates[rng.uniform_index(std::size(kStates))];
  char zip[8];
  std::snprintf(zip, sizeof(zip), "%05llu",
                static_cast<unsigned long long>(10000 + rng.uniform_index(89000)));
  r.zip_code = zip;

  static const double home_weights[4] = {0.40, 0.12, 0.45, 0.03};
  r.home_ownership = static_cast<HomeOwnership>(pick_weighted(rng, home_weights, 4));

  static const double purpose_weights[14] = {
      0.55, 0.20, 0.06, 0.015, 0.04, 0.03, 0.02, 0.015,
      0.01, 0.01, 0.005, 0.005, 0.005, 0.035};
  r.purpose = static_cast<Purpose>(pick_weighted(rng, purpose_weights, 14));

  r.term_months = rng.uniform01() < 0.7 ? 36 : 60;

  // Funded amount in [1000, 40000] dollars, rounded to $25 steps.
  const double funded_dollars =
      1000.0 + 39000.0 * std::pow(rng.uniform01(), 1.3);
  r.total_funded_amount =
      static_cast<Cents>(std::llround(funded_dollars / 25.0)) * 2500;
  r.loan_amount = r.total_funded_amount;
  if (rng.uniform01() > 0.92)
    r.loan_amount += static_cast<Cents>(rng.uniform_index(200)) * 2500;

  const double income_dollars = std::clamp(
      std::exp(11.0 + 0.55 * rng.normal()), 10000.0, 500000.0);
  const Cents income_cents = static_cast<Cents>(std::llround(income_dollars)) * 100;
  const double dti_value =
      std::clamp(30.0 * std::pow(rng.uniform01(), 1.4) + 2.0 * rng.normal(),
                 0.0, 60.0);

  // Latent risk: expensive credit, high leverage, low income, long term and
  // a few purpose/tenure markers all push toward default.
  const double income_norm = (std::log(income_dollars) - 11.0) / 0.55;
  const double risk_purpose =
      (r.purpose == Purpose::SmallBusiness || r.purpose == Purpose::Moving ||
       r.purpose == Purpose::Medical)
          ? 1.0
          : 0.0;
  double z = 0.5 * dti_value / 30.0 - 0.55 * income_norm +
             0.35 * (r.term_months == 60 ? 1.0 : 0.0) + 0.45 * risk_purpose +
             0.25 * (r.home_ownership == HomeOwnership::Rent ? 1.0 : 0.0) +
             0.5 * rng.normal();

  // Interest rate prices part of the risk in, which gives the PD model its
  // strongest observable feature.
  r.interest_rate = std::clamp(9.5 + 4.5 * z + 2.5 * rng.normal(), 5.31, 30.99);
  z += 0.9 * (r.interest_rate - 9.5) / 4.5;

  r.annual_income = income_cents;
  r.dti = dti_value;
  if (cfg.missing_rate > 0.0) {
    if (rng.uniform01() < cfg.missing_rate) r.annual_income.reset();
    if (rng.uniform01() < cfg.missing_rate) r.dti.reset();
  }

  d.risk = z;
  return d;
}

// Intercept such that mean(sigmoid(a + z_i)) equals the configured rate.
double calibrate_intercept(const std::vector<double>& risks, double rate) {
  double lo = -40.0, hi = 40.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double z : risks) mean += sigmoid(mid + z);
    mean /= static_cast<double>(risks.size());
    if (mean < rate)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n < 1) throw InvalidConfig("generator requires n >= 1");
  if (cfg.default_rate < 0.0 || cfg.default_rate > 1.0)
    throw InvalidConfig("default_rate must lie in [0, 1]");
  if (cfg.recovery_positive_prob < 0.0 || cfg.recovery_positive_prob > 1.0)
    throw InvalidConfig("recovery_positive_prob must lie in [0, 1]");
  if (cfg.missing_rate < 0.0 || cfg.missing_rate > 1.0)
    throw InvalidConfig("missing_rate must lie in [0, 1]");

  std::vector<Draft> drafts;
  drafts.reserve(cfg.n);
  std::vector<double> risks(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    drafts.push_back(draw_features(i, cfg));
    risks[i] = drafts.back().risk;
  }

  double intercept = 0.0;
  if (cfg.default_rate > 0.0 && cfg.default_rate < 1.0)
    intercept = calibrate_intercept(risks, cfg.default_rate);

  Dataset out;
  out.provenance = Provenance::Synthetic;
  out.records.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng = Rng::derived(cfg.seed, kOutcomeStream + i);
    LoanRecord& r = drafts[i].record;
    const double z = drafts[i].risk;

    double p_default = 0.0;
    if (cfg.default_rate >= 1.0)
      p_default = 1.0;
    else if (cfg.default_rate > 0.0)
      p_default = sigmoid(intercept + z);

    const bool defaulted = rng.uniform01() < p_default;
    if (defaulted) {
      r.loan_status =
          rng.uniform01() < 0.9 ? LoanStatus::ChargedOff : LoanStatus::Default;
      // Riskier borrowers default earlier, with less principal recovered.
      const double recovered_frac = std::clamp(
          0.9 * std::pow(rng.uniform01(), 1.5) * (1.15 - 0.3 * sigmoid(z)),
          0.0, 0.98);
      r.total_recovered_principal = static_cast<Cents>(
          std::llround(static_cast<double>(r.total_funded_amount) * recovered_frac));
      const Cents ead = r.total_funded_amount - r.total_recovered_principal;
      if (rng.uniform01() < cfg.recovery_positive_prob) {
        const double recovery_frac =
            std::pow(rng.uniform01(), 2.0) * (0.3 + 0.4 * sigmoid(-z));
        r.recoveries = std::max<Cents>(
            1, static_cast<Cents>(std::llround(static_cast<double>(ead) * recovery_frac)));
      } else {
        r.recoveries = 0;
      }
    } else {
      static const double status_weights[4] = {0.55, 0.38, 0.045, 0.025};
      static const LoanStatus statuses[4] = {LoanStatus::FullyPaid,
                                             LoanStatus::Current,
                                             LoanStatus::Late,
                                             LoanStatus::InGrace};
      r.loan_status = statuses[pick_weighted(rng, status_weights, 4)];
      if (r.loan_status == LoanStatus::FullyPaid) {
        r.total_recovered_principal = r.total_funded_amount;
      } else {
        r.total_recovered_principal = static_cast<Cents>(std::llround(
            static_cast<double>(r.total_funded_amount) * (0.1 + 0.85 * rng.uniform01())));
      }
      r.recoveries = 0;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace dpcm
