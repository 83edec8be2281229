#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dpcm/learn/common.hpp"
#include "dpcm/rng.hpp"

namespace dpcm {

/// Flat node: internal nodes carry (feature, threshold, children); leaves
/// have feature = -1 and carry a value. Rows with x[feature] < threshold go
/// left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

  /// Leaf index (into nodes) each row of X lands in.
  std::vector<int> route(const Eigen::MatrixXd& X) const;

  /// Node indices of all leaves, ascending.
  std::vector<int> leaf_indices() const;
};

/// Complete binary tree of the given depth whose split features and
/// thresholds are drawn uniformly from the public per-feature bounds. Reads
/// no data, so it is free under the privacy accounting.
Tree build_random_structure(int depth,
                            std::span<const ClippingBounds> feature_bounds,
                            Rng& rng);

}  // namespace dpcm
