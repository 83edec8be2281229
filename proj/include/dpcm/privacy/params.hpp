#pragma once

#include <algorithm>
#include <cmath>

#include "dpcm/errors.hpp"

namespace dpcm {

/// (epsilon, delta) privacy-loss bound. delta = 0 means pure DP.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw InvalidParams("epsilon must be positive and finite");
    if (!(delta >= 0.0) || !(delta < 1.0))
      throw InvalidParams("delta must lie in [0, 1)");
  }

  PrivacyParams operator+(const PrivacyParams& other) const {
    return {epsilon + other.epsilon, delta + other.delta};
  }
};

/// Public clipping range for one value. Sensitivity of a clipped sum under
/// add/remove of one record is max(|lower|, |upper|). Bounds come from schema
/// metadata, never from the data.
struct ClippingBounds {
  double lower = 0.0;
  double upper = 0.0;

  void validate() const {
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
      throw InvalidParams("clipping bounds require finite lower < upper");
  }

  double clip(double x) const { return std::min(upper, std::max(lower, x)); }

  double width() const { return upper - lower; }

  double sum_sensitivity() const {
    return std::max(std::abs(lower), std::abs(upper));
  }
};

}  // namespace dpcm
