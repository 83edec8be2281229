#pragma once

#include <cstdint>
#include <utility>

#include "dpcm/data/loan.hpp"

namespace dpcm {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Deterministic partition: |train| = round(train_fraction * n). Record
/// order inside each part follows the input order.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

/// Deterministic sample without replacement of round(fraction * n) records,
/// input order preserved. fraction = 1 returns the dataset unchanged.
Dataset subsample(const Dataset& dataset, double fraction, std::uint64_t seed);

}  // namespace dpcm
