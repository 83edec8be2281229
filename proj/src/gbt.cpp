#include "dpcm/learn/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "dpcm/errors.hpp"
#include "dpcm/privacy/mechanisms.hpp"

namespace dpcm {

Eigen::VectorXd GbtModel::predict_margin(const Eigen::MatrixXd& X) const {
  if (X.cols() != num_features)
    throw WidthMismatch("gbt expects " + std::to_string(num_features) +
                        " features, got " + std::to_string(X.cols()));
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(X.rows(), base_score);
  for (const Tree& t : trees)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      margin(i) += learning_rate * t.predict_row(X.row(i));
  return margin;
}

Eigen::VectorXd GbtModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd p = predict_margin(X);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = sigmoid(p(i));
  return p;
}

namespace {

double log_loss(const Eigen::VectorXd& margin, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    const double z = margin(i);
    const double softplus =
        z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y(i) * z;
  }
  return total / static_cast<double>(margin.size());
}

struct NewtonGreedyBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& g;
  const Eigen::VectorXd& h;
  const GbtConfig& config;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double G = 0.0, H = 0.0;
    for (int r : rows) {
      G += g(r);
      H += h(r);
    }
    const auto leaf_value = [&](double gs, double hs) {
      return -gs / (std::max(hs, 0.0) + config.lambda);
    };

    if (depth >= config.max_depth ||
        static_cast<int>(rows.size()) < config.min_samples_split) {
      tree.nodes[index].value = leaf_value(G, H);
      return index;
    }

    const double parent_gain = G * G / (H + config.lambda);
    double best_gain = parent_gain + 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> ordered(rows.size());
    for (int f = 0; f < X.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        ordered[i] = {X(rows[i], f), rows[i]};
      std::sort(ordered.begin(), ordered.end());
      double GL = 0.0, HL = 0.0;
      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        GL += g(ordered[i].second);
        HL += h(ordered[i].second);
        if (ordered[i].first == ordered[i + 1].first) continue;
        const double GR = G - GL, HR = H - HL;
        const double gain =
            GL * GL / (HL + config.lambda) + GR * GR / (HR + config.lambda);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[index].value = leaf_value(G, H);
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

Tree fit_round_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& g,
                    const Eigen::VectorXd& h, const GbtConfig& config,
                    std::span<const ClippingBounds> feature_bounds,
                    double epsilon_round, Rng& rng) {
  if (config.split_strategy == SplitStrategy::Greedy) {
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    NewtonGreedyBuilder builder{X, g, h, config, {}};
    builder.build(rows, 0);
    return std::move(builder.tree);
  }

  Tree tree = build_random_structure(config.max_depth, feature_bounds, rng);
  const std::vector<int> leaf_of_row = tree.route(X);

  std::vector<double> G(tree.nodes.size(), 0.0), H(tree.nodes.size(), 0.0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int leaf = leaf_of_row[static_cast<std::size_t>(i)];
    G[leaf] += std::clamp(g(i), -1.0, 1.0);
    H[leaf] += std::clamp(h(i), 0.0, 0.25);
  }

  const bool priv = config.mode == TrainMode::Private;
  for (int leaf : tree.leaf_indices()) {
    double gs = G[leaf], hs = H[leaf];
    if (priv) {
      gs = laplace_mechanism(gs, 1.0, epsilon_round / 2.0, rng);
      hs = laplace_mechanism(hs, 0.25, epsilon_round / 2.0, rng);
    }
    tree.nodes[leaf].value = -gs / (std::max(hs, 0.0) + config.lambda);
  }
  return tree;
}

}  // namespace

GbtModel train_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbtConfig& config,
                   std::span<const ClippingBounds> feature_bounds,
                   PrivacyAccountant* accountant) {
  if (X.rows() == 0) throw EmptyInput("training matrix is empty");
  if (X.rows() != y.size())
    throw WidthMismatch("row count mismatch between matrix and labels");
  if (config.num_rounds < 0) throw InvalidConfig("num_rounds must be >= 0");

  bool has_zero = false, has_one = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0.0)
      has_zero = true;
    else if (y(i) == 1.0)
      has_one = true;
    else
      throw InvalidParams("gbt labels must be 0 or 1");
  }
  if (!has_zero || !has_one)
    throw SingleClass("gbt training needs both classes present");

  const bool priv = config.mode == TrainMode::Private;
  if (priv) {
    if (config.split_strategy == SplitStrategy::Greedy)
      throw InvalidConfig(
          "greedy split selection is not available in private mode; use "
          "random splits");
    if (accountant == nullptr)
      throw InvalidConfig("private training requires an accountant");
    if (!(config.budget.epsilon > 0.0))
      throw InvalidParams("private training requires a positive epsilon share");
    if (config.num_rounds > 0)
      accountant->consume(config.budget_query_id, config.budget);
  }
  if (config.split_strategy == SplitStrategy::Random &&
      feature_bounds.size() != static_cast<std::size_t>(X.cols()))
    throw InvalidConfig("random splits need bounds for every feature column");

  GbtModel model;
  model.learning_rate = config.learning_rate;
  model.num_features = static_cast<int>(X.cols());

  // Greedy boosting starts from the log-odds of the label mean. The random
  // structure (shared by private training and its exact twin) starts from
  // even odds, saving the label-mean release.
  if (config.split_strategy == SplitStrategy::Greedy) {
    const double mean =
        std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    model.base_score = logit(mean);
  } else {
    model.base_score = 0.0;
  }

  const double epsilon_round =
      priv && config.num_rounds > 0
          ? config.budget.epsilon / static_cast<double>(config.num_rounds)
          : 0.0;

  const Eigen::Index n = X.rows();
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, model.base_score);
  Eigen::VectorXd g(n), h(n);
  for (int round = 0; round < config.num_rounds; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(margin(i));
      g(i) = p - y(i);
      h(i) = p * (1.0 - p);
    }
    Rng rng = Rng::derived(config.seed, static_cast<std::uint64_t>(round));
    Tree tree =
        fit_round_tree(X, g, h, config, feature_bounds, epsilon_round, rng);
    for (Eigen::Index i = 0; i < n; ++i)
      margin(i) += config.learning_rate * tree.predict_row(X.row(i));
    model.trees.push_back(std::move(tree));
    if (!priv) model.training_loss.push_back(log_loss(margin, y));
  }
  return model;
}

}  // namespace dpcm
