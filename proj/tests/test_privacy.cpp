#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "doctest.h"
#include "dpcm/privacy/accountant.hpp"
#include "dpcm/privacy/mechanisms.hpp"

using namespace dpcm;

TEST_CASE("accountant: additive composition") {
  PrivacyAccountant acc({1.0, 1e-5});
  acc.consume("q1", {0.4, 0.0});
  CHECK(acc.spent().epsilon == doctest::Approx(0.4));
  CHECK(acc.ledger().size() == 1);
}

TEST_CASE("accountant: exhaustion leaves state unchanged") {
  PrivacyAccountant acc({1.0, 0.0});
  acc.consume("q1", {0.8, 0.0});
  CHECK_THROWS_AS(acc.consume("q2", {0.4, 0.0}), BudgetExhausted);
  CHECK(acc.spent().epsilon == doctest::Approx(0.8));
  CHECK(acc.ledger().size() == 1);
}

TEST_CASE("accountant: sequential sums") {
  PrivacyAccountant acc({1.0, 0.0});
  acc.consume("a", {0.3, 0.0});
  acc.consume("b", {0.3, 0.0});
  CHECK(acc.spent().epsilon == doctest::Approx(0.6));
  CHECK(acc.ledger().size() == 2);
}

TEST_CASE("accountant: spending to the exact boundary succeeds") {
  PrivacyAccountant acc({1.0, 0.0});
  acc.consume("a", {0.5, 0.0});
  acc.consume("b", {0.5, 0.0});
  CHECK(acc.spent().epsilon == doctest::Approx(1.0));
  CHECK_THROWS_AS(acc.consume("c", {1e-9, 0.0}), BudgetExhausted);
}

TEST_CASE("accountant: delta budget is enforced independently") {
  PrivacyAccountant acc({10.0, 1e-6});
  CHECK_THROWS_AS(acc.consume("q", {0.1, 1e-5}), BudgetExhausted);
  acc.consume("q", {0.1, 1e-6});
  CHECK(acc.spent().delta == doctest::Approx(1e-6));
}

TEST_CASE("accountant: spend is monotone and replaying the ledger recomputes it") {
  PrivacyAccountant acc({4.0, 1e-4});
  Rng rng(99);
  double previous = 0.0;
  for (int i = 0; i < 200; ++i) {
    const PrivacyParams cost{rng.uniform(0.001, 0.05),
                             rng.uniform01() < 0.3 ? 1e-7 : 0.0};
    try {
      acc.consume("q" + std::to_string(i), cost);
    } catch (const BudgetExhausted&) {
    }
    const double spent = acc.spent().epsilon;
    CHECK(spent >= previous);
    CHECK(spent <= acc.budget().epsilon);
    previous = spent;
  }
  double ledger_eps = 0.0, ledger_delta = 0.0;
  for (const auto& e : acc.ledger()) {
    ledger_eps += e.epsilon;
    ledger_delta += e.delta;
  }
  CHECK(ledger_eps == doctest::Approx(acc.spent().epsilon).epsilon(1e-12));
  CHECK(ledger_delta == doctest::Approx(acc.spent().delta).epsilon(1e-12));
}

TEST_CASE("accountant: concurrent consumes are linearizable") {
  // 0.015625 = 2^-6 keeps the arithmetic exact regardless of ordering.
  PrivacyAccountant acc({16.0, 0.0});
  constexpr int kThreads = 8;
  constexpr int kPerThread = 75;
  std::vector<std::thread> pool;
  for (int t = 0; t < kThreads; ++t) {
    pool.emplace_back([&acc, t] {
      for (int i = 0; i < kPerThread; ++i)
        acc.consume("t" + std::to_string(t), {0.015625, 0.0});
    });
  }
  for (auto& t : pool) t.join();
  CHECK(acc.ledger().size() == kThreads * kPerThread);
  CHECK(acc.spent().epsilon == doctest::Approx(kThreads * kPerThread * 0.015625));
}

TEST_CASE("laplace: vanishing noise at huge epsilon") {
  Rng rng(1);
  CHECK(laplace_mechanism(100.0, 1.0, 1e12, rng) ==
        doctest::Approx(100.0).epsilon(1e-8));
}

TEST_CASE("laplace: empirical variance matches 2b^2") {
  Rng rng(7);
  const double b = 1.0 / 0.5;
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kSamples = 100000;
  for (int i = 0; i < kSamples; ++i) {
    const double x = laplace_mechanism(0.0, 1.0, 0.5, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / kSamples;
  const double variance = sum_sq / kSamples - mean * mean;
  CHECK(variance == doctest::Approx(2.0 * b * b).epsilon(0.10));
}

TEST_CASE("laplace: deterministic given the seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i)
    CHECK(laplace_mechanism(5.0, 1.0, 0.7, a) ==
          laplace_mechanism(5.0, 1.0, 0.7, b));
}

TEST_CASE("laplace: rejects bad parameters") {
  Rng rng(0);
  CHECK_THROWS_AS(laplace_mechanism(0.0, 0.0, 1.0, rng), InvalidParams);
  CHECK_THROWS_AS(laplace_mechanism(0.0, 1.0, -1.0, rng), InvalidParams);
}

TEST_CASE("gaussian: vanishing noise at huge epsilon") {
  Rng rng(3);
  CHECK(gaussian_mechanism(0.0, 1.0, {1e12, 1e-5}, rng) ==
        doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("gaussian: empirical sigma matches the calibration") {
  // sigma = sqrt(2 ln(1.25e5)) for sens 1, eps 1, delta 1e-5.
  const double sigma = gaussian_sigma(1.0, {1.0, 1e-5});
  CHECK(sigma == doctest::Approx(4.8448).epsilon(1e-3));
  Rng rng(11);
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kSamples = 100000;
  for (int i = 0; i < kSamples; ++i) {
    const double x = gaussian_mechanism(0.0, 1.0, {1.0, 1e-5}, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / kSamples;
  const double sd = std::sqrt(sum_sq / kSamples - mean * mean);
  CHECK(sd == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("gaussian: determinism and delta validation") {
  Rng a(5), b(5);
  CHECK(gaussian_mechanism(1.0, 1.0, {2.0, 1e-6}, a) ==
        gaussian_mechanism(1.0, 1.0, {2.0, 1e-6}, b));
  Rng rng(5);
  CHECK_THROWS_AS(gaussian_mechanism(0.0, 1.0, {1.0, 0.0}, rng), InvalidParams);
}

TEST_CASE("dp_median: constant data returns the constant") {
  Rng rng(17);
  const std::vector<double> values = {5, 5, 5, 5};
  CHECK(dp_median(values, {0.0, 10.0}, 0.5, rng) == 5.0);
}

TEST_CASE("dp_median: huge epsilon recovers the true median exactly") {
  std::vector<double> values;
  for (int i = 1; i <= 1001; ++i) values.push_back(i);
  Rng rng(23);
  CHECK(dp_median(values, {0.0, 1002.0}, 1e9, rng) == 501.0);
}

TEST_CASE("dp_median: calibrated accuracy on a uniform sample") {
  // Oracle: the exact median, plus Monte Carlo over 200 mechanism draws.
  Rng data_rng(31);
  std::vector<double> values(10000);
  for (auto& v : values) v = data_rng.uniform(0.0, 100.0);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double exact = 0.5 * (sorted[4999] + sorted[5000]);

  Rng mech_rng(37);
  int hits = 0;
  for (int t = 0; t < 200; ++t) {
    const double m = dp_median(values, {0.0, 100.0}, 1.0, mech_rng);
    CHECK(m >= 0.0);
    CHECK(m <= 100.0);
    if (std::abs(m - exact) <= 5.0) ++hits;
  }
  CHECK(hits >= 190);
}

TEST_CASE("dp_median: rejects empty input") {
  Rng rng(0);
  CHECK_THROWS_AS(dp_median(std::vector<double>{}, {0.0, 1.0}, 1.0, rng),
                  EmptyInput);
}

TEST_CASE("dp_sum: empty input is noise around zero") {
  Rng rng(41);
  const double b = 10.0 / 1.0;
  const double x = dp_sum(std::vector<double>{}, {0.0, 10.0}, 1.0, rng);
  CHECK(std::abs(x) < 30.0 * b);  // P(beyond) = e^-30
}

TEST_CASE("dp_sum: huge epsilon recovers the clipped sum") {
  std::vector<double> values(100, 1000.0);
  Rng rng(43);
  CHECK(dp_sum(values, {0.0, 1000.0}, 1e9, rng) ==
        doctest::Approx(100000.0).epsilon(1e-9));
}

TEST_CASE("dp_sum: 95th percentile error tracks the Laplace tail bound") {
  // Oracle: P(|L| > t) = exp(-t/b), so the 95th percentile of |error| is
  // b ln 20 = 150k here. A portfolio total of ~$50M at bounds [0, 50000],
  // eps 1 therefore stays within 0.5% of the exact total in >= 95% of
  // trials; smaller totals (the bound exceeds 0.5% of them) cannot.
  Rng data_rng(47);
  std::vector<double> values(39000);
  double total = 0.0;
  for (auto& v : values) {
    v = data_rng.uniform(0.0, 2600.0);
    total += v;
  }
  REQUIRE(total > 4.5e7);

  const ClippingBounds bounds{0.0, 50000.0};
  const double b = bounds.sum_sensitivity() / 1.0;
  const double tail_95 = b * std::log(20.0);

  Rng mech_rng(53);
  std::vector<double> errors;
  int within_half_pct = 0;
  for (int t = 0; t < 200; ++t) {
    const double err = std::abs(dp_sum(values, bounds, 1.0, mech_rng) - total);
    errors.push_back(err);
    if (err < 0.005 * total) ++within_half_pct;
  }
  std::sort(errors.begin(), errors.end());
  CHECK(errors[189] < 1.6 * tail_95);  // sampled quantile near the bound
  CHECK(within_half_pct >= 190);
}

TEST_CASE("dp_sum: clipping makes outliers indistinguishable from the bound") {
  std::vector<double> a = {10, 20, 1e9, 30};
  std::vector<double> b = {10, 20, 1000.0, 30};
  Rng ra(59), rb(59);
  CHECK(dp_sum(a, {0.0, 1000.0}, 1.0, ra) == dp_sum(b, {0.0, 1000.0}, 1.0, rb));
}

TEST_CASE("epsilon convergence across all mechanisms") {
  Rng rng(61);
  const std::vector<double> values = {1.0, 2.0, 3.0, 4.0, 100.0};
  const double clipped_sum = 1 + 2 + 3 + 4 + 10;
  CHECK(std::abs(laplace_mechanism(42.0, 1.0, 1e9, rng) - 42.0) <= 1e-3 * 42.0);
  CHECK(std::abs(gaussian_mechanism(42.0, 1.0, {1e9, 1e-5}, rng) - 42.0) <=
        1e-3 * 42.0);
  CHECK(std::abs(dp_sum(values, {0.0, 10.0}, 1e9, rng) - clipped_sum) <= 1e-3);
  CHECK(std::abs(dp_median(values, {0.0, 10.0}, 1e9, rng) - 3.0) <= 1e-3);
}

TEST_CASE("clipping bounds validation") {
  CHECK_THROWS_AS((ClippingBounds{1.0, 1.0}.validate()), InvalidParams);
  CHECK(ClippingBounds{-2.0, 3.0}.sum_sensitivity() == 3.0);
  CHECK(ClippingBounds{-5.0, 3.0}.sum_sensitivity() == 5.0);
  CHECK(ClippingBounds{0.0, 10.0}.clip(-1.0) == 0.0);
  CHECK(ClippingBounds{0.0, 10.0}.clip(11.0) == 10.0);
}
