#include "dpcm/learn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpcm/errors.hpp"
#include "dpcm/privacy/mechanisms.hpp"

namespace dpcm {

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != num_features)
    throw WidthMismatch("forest expects " + std::to_string(num_features) +
                        " features, got " + std::to_string(X.cols()));
  if (trees.empty()) throw InvalidConfig("forest has no trees");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (const Tree& t : trees)
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) += t.predict_row(X.row(i));
  return out / static_cast<double>(trees.size());
}

namespace {

struct GreedyBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const ForestConfig& config;
  Rng& rng;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0.0;
    for (int r : rows) sum += y(r);
    const double mean = sum / static_cast<double>(rows.size());

    if (depth >= config.max_depth ||
        static_cast<int>(rows.size()) < config.min_samples_split) {
      tree.nodes[index].value = mean;
      return index;
    }

    // sqrt(d) feature subsample, drawn before the split search so the rng
    // stream advances identically whether or not a usable split exists.
    const int d = static_cast<int>(X.cols());
    const int k = std::max(1, static_cast<int>(std::ceil(std::sqrt(d))));
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng.uniform_index(d - i));
      std::swap(features[i], features[j]);
    }

    // Best split maximizes sum_L^2/n_L + sum_R^2/n_R (equivalent to the SSE
    // reduction for a fixed parent).
    const double parent_score = sum * sum / static_cast<double>(rows.size());
    double best_score = parent_score + 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, double>> ordered(rows.size());
    for (int fi = 0; fi < k; ++fi) {
      const int f = features[fi];
      for (std::size_t i = 0; i < rows.size(); ++i)
        ordered[i] = {X(rows[i], f), y(rows[i])};
      std::sort(ordered.begin(), ordered.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        left_sum += ordered[i].second;
        if (ordered[i].first == ordered[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(ordered.size() - i - 1);
        const double score = left_sum * left_sum / nl +
                             (sum - left_sum) * (sum - left_sum) / nr;
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[index].value = mean;
      return index;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows)
      (X(r, best_feature) < best_threshold ? left_rows : right_rows).push_back(r);

    tree.nodes[index].feature = best_feature;
    tree.nodes[index].threshold = best_threshold;
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
  }
};

Tree train_greedy_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestConfig& config, Rng& rng) {
  const Eigen::Index n = X.rows();
  std::vector<int> rows(static_cast<std::size_t>(n));
  if (config.bootstrap) {
    for (auto& r : rows)
      r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  }
  GreedyBuilder builder{X, y, config, rng, {}};
  builder.build(rows, 0);
  return std::move(builder.tree);
}

Tree train_random_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestConfig& config,
                       std::span<const ClippingBounds> feature_bounds,
                       double epsilon_tree, Rng& rng) {
  Tree tree = build_random_structure(config.max_depth, feature_bounds, rng);
  const std::vector<int> leaf_of_row = tree.route(X);
  const std::vector<int> leaves = tree.leaf_indices();

  std::vector<double> sums(tree.nodes.size(), 0.0);
  std::vector<std::size_t> counts(tree.nodes.size(), 0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int leaf = leaf_of_row[static_cast<std::size_t>(i)];
    sums[leaf] += config.label_bounds.clip(y(i));
    counts[leaf] += 1;
  }

  const bool priv = config.mode == TrainMode::Private;
  for (int leaf : leaves) {
    double s = sums[leaf];
    double c = static_cast<double>(counts[leaf]);
    if (priv) {
      s = laplace_mechanism(s, config.label_bounds.sum_sensitivity(),
                            epsilon_tree / 2.0, rng);
      c = dp_count(counts[leaf], epsilon_tree / 2.0, rng);
    }
    // The mean of clipped labels lies in the label bounds, so the noisy
    // ratio is clamped back into them (post-processing, no extra spend).
    tree.nodes[leaf].value =
        config.label_bounds.clip(s / std::max(1.0, c));
  }
  return tree;
}

}  // namespace

ForestModel train_random_forest(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y,
                                const ForestConfig& config,
                                std::span<const ClippingBounds> feature_bounds,
                                PrivacyAccountant* accountant) {
  if (X.rows() == 0) throw EmptyInput("training matrix is empty");
  if (X.rows() != y.size())
    throw WidthMismatch("row count mismatch between matrix and targets");
  if (config.num_trees < 1) throw InvalidConfig("num_trees must be at least 1");

  const bool priv = config.mode == TrainMode::Private;
  SplitStrategy strategy = config.split_strategy;
  if (priv) {
    if (strategy == SplitStrategy::Greedy)
      throw InvalidConfig(
          "greedy split selection is not available in private mode; use "
          "random splits");
    if (accountant == nullptr)
      throw InvalidConfig("private training requires an accountant");
    if (!(config.budget.epsilon > 0.0))
      throw InvalidParams("private training requires a positive epsilon share");
    config.label_bounds.validate();
    accountant->consume(config.budget_query_id, config.budget);
  }
  if (strategy == SplitStrategy::Random && feature_bounds.size() !=
      static_cast<std::size_t>(X.cols()))
    throw InvalidConfig("random splits need bounds for every feature column");

  const double epsilon_tree =
      priv ? config.budget.epsilon / static_cast<double>(config.num_trees) : 0.0;

  ForestModel model;
  model.num_features = static_cast<int>(X.cols());
  model.trees.reserve(static_cast<std::size_t>(config.num_trees));
  for (int t = 0; t < config.num_trees; ++t) {
    Rng rng = Rng::derived(config.seed, static_cast<std::uint64_t>(t));
    if (strategy == SplitStrategy::Greedy) {
      model.trees.push_back(train_greedy_tree(X, y, config, rng));
    } else {
      model.trees.push_back(
          train_random_tree(X, y, config, feature_bounds, epsilon_tree, rng));
    }
  }
  return model;
}

}  // namespace dpcm
