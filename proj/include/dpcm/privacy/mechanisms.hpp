#pragma once

#include <span>
#include <vector>

#include "dpcm/privacy/params.hpp"
#include "dpcm/rng.hpp"

namespace dpcm {

/// true_value + Laplace(scale = sensitivity / epsilon). Deterministic given
/// the rng stream position.
double laplace_mechanism(double true_value, double sensitivity, double epsilon,
                         Rng& rng);

/// true_value + N(0, sigma^2) with the classical calibration
/// sigma = sensitivity * sqrt(2 ln(1.25/delta)) / epsilon. Requires delta > 0.
double gaussian_mechanism(double true_value, double sensitivity,
                          const PrivacyParams& params, Rng& rng);

/// Exponential mechanism over the clipped, sorted values with utility
/// u(i) = -|i - n/2| on 0-based ranks. Candidates at one utility level are
/// sampled as a group and resolved to the lowest index, which makes the
/// epsilon -> infinity limit deterministic. Result lies inside bounds.
double dp_median(std::span<const double> values, const ClippingBounds& bounds,
                 double epsilon, Rng& rng);

/// Clips every value to bounds, sums, and releases the sum through the
/// Laplace mechanism with sensitivity max(|lower|, |upper|).
double dp_sum(std::span<const double> values, const ClippingBounds& bounds,
              double epsilon, Rng& rng);

/// Noisy count: Laplace mechanism at sensitivity 1.
double dp_count(std::size_t count, double epsilon, Rng& rng);

/// Gaussian sigma used by gaussian_mechanism; exposed for calibration tests.
double gaussian_sigma(double sensitivity, const PrivacyParams& params);

}  // namespace dpcm
