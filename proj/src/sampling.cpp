#include "dpcm/data/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dpcm/errors.hpp"
#include "dpcm/rng.hpp"

namespace dpcm {

namespace {

// First k indices of a seeded Fisher-Yates shuffle of 0..n-1, returned in
// ascending order so sampled records keep their input order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.empty()) throw EmptyInput("split: dataset is empty");
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0))
    throw InvalidFraction("train_fraction must lie in (0, 1)");

  const std::size_t n = dataset.size();
  const std::size_t k = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  const std::vector<std::size_t> train_idx = sample_indices(n, k, spec.seed);

  std::vector<bool> in_train(n, false);
  for (std::size_t i : train_idx) in_train[i] = true;

  Dataset train, test;
  train.schema_version = test.schema_version = dataset.schema_version;
  train.provenance = test.provenance = dataset.provenance;
  train.records.reserve(k);
  test.records.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? train : test).records.push_back(dataset.records[i]);
  return {std::move(train), std::move(test)};
}

Dataset subsample(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction <= 1.0))
    throw InvalidFraction("subsample fraction must lie in (0, 1]");
  const std::size_t n = dataset.size();
  const std::size_t k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));

  Dataset out;
  out.schema_version = dataset.schema_version;
  out.provenance = dataset.provenance;
  out.records.reserve(k);
  for (std::size_t i : sample_indices(n, k, seed))
    out.records.push_back(dataset.records[i]);
  return out;
}

}  // namespace dpcm
