#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "dpcm/learn/common.hpp"
#include "dpcm/privacy/accountant.hpp"

namespace dpcm {

enum class LinkFunction { Identity, Logit };

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  LinkFunction link = LinkFunction::Identity;

  /// Identity: X w + b. Logit: sigmoid of that, strictly inside (0, 1).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct GlmConfig {
  TrainMode mode = TrainMode::Exact;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double step_size = 0.1;
  double l2 = 1e-4;  // applied to weights, not the intercept
  double tolerance = 1e-8;

  // Private mode: per-record gradients are clipped to this L2 norm and each
  // of max_iterations steps adds Gaussian noise calibrated to budget split
  // evenly across iterations (basic composition). One upfront accountant
  // debit under budget_query_id.
  PrivacyParams budget{};
  double clip_norm = 1.0;
  std::string budget_query_id = "train/glm";
};

// Losses and their analytic gradients, exposed so tests can check against
// finite differences. Mean loss over rows plus (l2/2)||w||^2.
double linear_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& w, double intercept, double l2);
void linear_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double intercept, double l2,
                     Eigen::VectorXd& grad_w, double& grad_b);
double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double intercept, double l2);
void logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double intercept, double l2,
                       Eigen::VectorXd& grad_w, double& grad_b);

/// Full-batch gradient descent on squared loss. Exact mode runs to the
/// gradient tolerance or max_iterations; private mode runs every iteration
/// with clipped per-record gradients and Gaussian noise.
LinearModel train_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const GlmConfig& config,
                         PrivacyAccountant* accountant = nullptr);

/// Same contract on log-loss; labels must contain both classes.
LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const GlmConfig& config,
                           PrivacyAccountant* accountant = nullptr);

}  // namespace dpcm
