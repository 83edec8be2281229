#include "dpcm/learn/tree.hpp"

#include "dpcm/errors.hpp"

namespace dpcm {

double Tree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  while (!nodes[at].is_leaf()) {
    const TreeNode& n = nodes[at];
    at = row(n.feature) < n.threshold ? n.left : n.right;
  }
  return nodes[at].value;
}

std::vector<int> Tree::route(const Eigen::MatrixXd& X) const {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int at = 0;
    while (!nodes[at].is_leaf()) {
      const TreeNode& n = nodes[at];
      at = X(i, n.feature) < n.threshold ? n.left : n.right;
    }
    out[static_cast<std::size_t>(i)] = at;
  }
  return out;
}

std::vector<int> Tree::leaf_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_leaf()) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

int build_random_node(Tree& tree, int depth,
                      std::span<const ClippingBounds> bounds, Rng& rng) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth == 0) return index;
  const int feature = static_cast<int>(rng.uniform_index(bounds.size()));
  const double threshold =
      rng.uniform(bounds[feature].lower, bounds[feature].upper);
  tree.nodes[index].feature = feature;
  tree.nodes[index].threshold = threshold;
  const int left = build_random_node(tree, depth - 1, bounds, rng);
  const int right = build_random_node(tree, depth - 1, bounds, rng);
  tree.nodes[index].left = left;
  tree.nodes[index].right = right;
  return index;
}

}  // namespace

Tree build_random_structure(int depth,
                            std::span<const ClippingBounds> feature_bounds,
                            Rng& rng) {
  if (feature_bounds.empty())
    throw InvalidConfig("random splits need per-feature bounds");
  if (depth < 0) throw InvalidConfig("tree depth must be nonnegative");
  Tree tree;
  tree.nodes.reserve((std::size_t{2} << depth) - 1);
  build_random_node(tree, depth, feature_bounds, rng);
  return tree;
}

}  // namespace dpcm
