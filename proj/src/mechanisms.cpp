#include "dpcm/privacy/mechanisms.hpp"

#include <algorithm>
#include <cmath>

namespace dpcm {

double laplace_mechanism(double true_value, double sensitivity, double epsilon,
                         Rng& rng) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity))
    throw InvalidParams("laplace: sensitivity must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidParams("laplace: epsilon must be positive");
  return true_value + rng.laplace(sensitivity / epsilon);
}

double gaussian_sigma(double sensitivity, const PrivacyParams& params) {
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / params.delta)) /
         params.epsilon;
}

double gaussian_mechanism(double true_value, double sensitivity,
                          const PrivacyParams& params, Rng& rng) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity))
    throw InvalidParams("gaussian: sensitivity must be positive");
  params.validate();
  if (params.delta == 0.0)
    throw InvalidParams("gaussian: delta must be strictly positive");
  return true_value + gaussian_sigma(sensitivity, params) * rng.normal();
}

double dp_median(std::span<const double> values, const ClippingBounds& bounds,
                 double epsilon, Rng& rng) {
  if (values.empty()) throw EmptyInput("dp_median: no values");
  bounds.validate();
  if (!(epsilon > 0.0)) throw InvalidParams("dp_median: epsilon must be positive");

  std::vector<double> sorted(values.begin(), values.end());
  for (double& v : sorted) v = bounds.clip(v);
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const double target = static_cast<double>(n) / 2.0;

  // Ranks i and n-i share the utility level -|i - n/2|. Sampling the level
  // and resolving ties to the lowest rank keeps the draw deterministic when
  // one level dominates (the epsilon -> infinity regime).
  struct Level {
    double utility;
    std::size_t lowest_index;
    int multiplicity;
  };
  std::vector<Level> levels;
  levels.reserve(n / 2 + 1);
  for (std::size_t i = 0; i <= n / 2; ++i) {
    const std::size_t mirror = n - i;
    const int multiplicity = (mirror <= n - 1 && mirror != i) ? 2 : 1;
    levels.push_back(
        {-std::abs(static_cast<double>(i) - target), i, multiplicity});
  }
  const double best_utility = levels.back().utility;

  // Exponential mechanism with utility sensitivity 1: P(level) proportional
  // to multiplicity * exp(epsilon * utility / 2), normalized at the max for
  // numerical stability.
  std::vector<double> weights(levels.size());
  double total = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    weights[k] = levels[k].multiplicity *
                 std::exp(0.5 * epsilon * (levels[k].utility - best_utility));
    total += weights[k];
  }
  const double draw = rng.uniform01() * total;
  double cumulative = 0.0;
  std::size_t chosen = levels.size() - 1;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    cumulative += weights[k];
    if (draw < cumulative) {
      chosen = k;
      break;
    }
  }
  return sorted[levels[chosen].lowest_index];
}

double dp_sum(std::span<const double> values, const ClippingBounds& bounds,
              double epsilon, Rng& rng) {
  bounds.validate();
  if (!(epsilon > 0.0)) throw InvalidParams("dp_sum: epsilon must be positive");
  double sum = 0.0;
  for (double v : values) sum += bounds.clip(v);
  return laplace_mechanism(sum, bounds.sum_sensitivity(), epsilon, rng);
}

double dp_count(std::size_t count, double epsilon, Rng& rng) {
  return laplace_mechanism(static_cast<double>(count), 1.0, epsilon, rng);
}

}  // namespace dpcm
