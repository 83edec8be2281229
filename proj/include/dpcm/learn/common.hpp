#pragma once

#include <cmath>
#include <cstdint>

#include "dpcm/privacy/params.hpp"

namespace dpcm {

enum class TrainMode { Exact, Private };

/// How tree split points are chosen. Greedy splits read the data; Random
/// splits are drawn from the public schema bounds and cost no budget, which
/// is why private tree training always uses them.
enum class SplitStrategy { Greedy, Random };

/// Logistic function with the margin clamped so outputs stay strictly inside
/// (0, 1) in double precision.
inline double sigmoid(double z) {
  const double c = std::clamp(z, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-c));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace dpcm
