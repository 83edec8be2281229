#pragma once

#include <string>

#include "dpcm/learn/tree.hpp"
#include "dpcm/privacy/accountant.hpp"

namespace dpcm {

/// Boosted binary classifier: prediction = sigmoid(base_score +
/// learning_rate * sum of tree outputs), strictly inside (0, 1).
struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  int num_features = 0;

  /// Exact-mode training log-loss after each round (diagnostics; never
  /// recorded for private models and never serialized).
  std::vector<double> training_loss;

  Eigen::VectorXd predict_margin(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct GbtConfig {
  TrainMode mode = TrainMode::Exact;
  SplitStrategy split_strategy = SplitStrategy::Greedy;
  std::uint64_t seed = 0;
  int num_rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double lambda = 1.0;  // leaf shrinkage in -G/(H + lambda)
  int min_samples_split = 2;

  // Private mode (random splits only): each round's budget is
  // epsilon/num_rounds, split between the per-leaf gradient sums (|g| <= 1)
  // and hessian sums (h <= 0.25); leaves compose in parallel. One upfront
  // accountant debit under budget_query_id.
  PrivacyParams budget{};
  std::string budget_query_id = "train/gbt";
};

/// Newton boosting on log-loss. Greedy mode starts from the log-odds of the
/// label mean and picks gain-maximizing splits; random-split mode (the
/// private structure, also available exactly for like-for-like comparisons)
/// starts from even odds and draws splits from the public feature bounds.
GbtModel train_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbtConfig& config,
                   std::span<const ClippingBounds> feature_bounds,
                   PrivacyAccountant* accountant = nullptr);

}  // namespace dpcm
