#pragma once

#include <string>

#include "dpcm/learn/tree.hpp"
#include "dpcm/privacy/accountant.hpp"

namespace dpcm {

/// Mean-aggregated regression forest.
struct ForestModel {
  std::vector<Tree> trees;
  int num_features = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct ForestConfig {
  TrainMode mode = TrainMode::Exact;
  SplitStrategy split_strategy = SplitStrategy::Greedy;
  std::uint64_t seed = 0;
  int num_trees = 100;
  int max_depth = 6;
  int min_samples_split = 2;
  bool bootstrap = true;  // greedy mode only; random splits use every row

  // Private mode (random splits only): per-tree budget is epsilon/num_trees,
  // spent half on noisy leaf sums of clipped labels and half on noisy leaf
  // counts; leaves partition the data so the per-leaf releases compose in
  // parallel. One upfront accountant debit under budget_query_id.
  PrivacyParams budget{};
  ClippingBounds label_bounds{0.0, 1.0};
  std::string budget_query_id = "train/random_forest";
};

/// Exact greedy mode: bootstrap per tree, variance-reduction splits over a
/// sqrt(d) feature subsample, mean leaves. Random-split mode (mandatory when
/// private): data-independent structure from feature_bounds, leaf value
/// sum(clipped labels) / max(1, count), noisy in private mode.
ForestModel train_random_forest(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y,
                                const ForestConfig& config,
                                std::span<const ClippingBounds> feature_bounds,
                                PrivacyAccountant* accountant = nullptr);

}  // namespace dpcm
