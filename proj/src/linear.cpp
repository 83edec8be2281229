#include "dpcm/learn/linear.hpp"

#include <cmath>

#include "dpcm/errors.hpp"
#include "dpcm/privacy/mechanisms.hpp"
#include "dpcm/rng.hpp"

namespace dpcm {

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != weights.size())
    throw WidthMismatch("linear model expects " + std::to_string(weights.size()) +
                        " features, got " + std::to_string(X.cols()));
  Eigen::VectorXd z = (X * weights).array() + intercept;
  if (link == LinkFunction::Logit)
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

double linear_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& w, double intercept, double l2) {
  const Eigen::VectorXd r = (X * w).array() + intercept - y.array();
  const double n = static_cast<double>(X.rows());
  return 0.5 * r.squaredNorm() / n + 0.5 * l2 * w.squaredNorm();
}

void linear_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double intercept, double l2,
                     Eigen::VectorXd& grad_w, double& grad_b) {
  const Eigen::VectorXd r = (X * w).array() + intercept - y.array();
  const double n = static_cast<double>(X.rows());
  grad_w = X.transpose() * r / n + l2 * w;
  grad_b = r.sum() / n;
}

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double intercept, double l2) {
  const Eigen::VectorXd z = (X * w).array() + intercept;
  const double n = static_cast<double>(X.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) - y z, computed stably for either sign of z.
    const double zi = z(i);
    const double softplus =
        zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
    total += softplus - y(i) * zi;
  }
  return total / n + 0.5 * l2 * w.squaredNorm();
}

void logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, double intercept, double l2,
                       Eigen::VectorXd& grad_w, double& grad_b) {
  Eigen::VectorXd r = (X * w).array() + intercept;
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = sigmoid(r(i)) - y(i);
  const double n = static_cast<double>(X.rows());
  grad_w = X.transpose() * r / n + l2 * w;
  grad_b = r.sum() / n;
}

namespace {

void validate_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0) throw EmptyInput("training matrix is empty");
  if (X.rows() != y.size())
    throw WidthMismatch("row count mismatch between matrix and targets");
  if (!y.allFinite() || !X.allFinite())
    throw InvalidParams("training data must be finite");
}

/// Residual-driven GLM descent shared by both links. The residual functor
/// maps margin z_i and label y_i to d(loss_i)/dz.
template <typename ResidualFn, typename LossFn>
LinearModel train_glm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const GlmConfig& config, PrivacyAccountant* accountant,
                      LinkFunction link, ResidualFn residual, LossFn loss) {
  validate_inputs(X, y);
  if (config.max_iterations < 1)
    throw InvalidConfig("max_iterations must be at least 1");

  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const bool priv = config.mode == TrainMode::Private;

  double sigma = 0.0;
  Rng rng(config.seed);
  if (priv) {
    if (accountant == nullptr)
      throw InvalidConfig("private training requires an accountant");
    if (!(config.budget.epsilon > 0.0))
      throw InvalidParams("private training requires a positive epsilon share");
    if (!(config.budget.delta > 0.0))
      throw InvalidParams("gaussian noise requires delta > 0");
    if (!(config.clip_norm > 0.0))
      throw InvalidParams("clip_norm must be positive");
    accountant->consume(config.budget_query_id, config.budget);
    const double iters = static_cast<double>(config.max_iterations);
    const PrivacyParams per_step{config.budget.epsilon / iters,
                                 config.budget.delta / iters};
    sigma = gaussian_sigma(config.clip_norm, per_step);
  }

  // Row norms of [x_i, 1] for the per-record clip factor.
  Eigen::VectorXd aug_norm;
  if (priv)
    aug_norm = (X.rowwise().squaredNorm().array() + 1.0).sqrt();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  const double nd = static_cast<double>(n);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::VectorXd z = (X * w).array() + b;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = residual(z(i), y(i));

    Eigen::VectorXd grad_w;
    double grad_b;
    if (priv) {
      // Per-record gradient is r_i * [x_i, 1]; clip its L2 norm to C, then
      // noise the clipped sum with the per-iteration Gaussian calibration.
      Eigen::VectorXd scaled = r;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = std::abs(r(i)) * aug_norm(i);
        if (norm > config.clip_norm) scaled(i) *= config.clip_norm / norm;
      }
      grad_w = X.transpose() * scaled;
      grad_b = scaled.sum();
      for (Eigen::Index j = 0; j < d; ++j) grad_w(j) += sigma * rng.normal();
      grad_b += sigma * rng.normal();
      grad_w = grad_w / nd + config.l2 * w;
      grad_b /= nd;
    } else {
      grad_w = X.transpose() * r / nd + config.l2 * w;
      grad_b = r.sum() / nd;
      const double g_inf = std::max(grad_w.cwiseAbs().maxCoeff(), std::abs(grad_b));
      if (g_inf < config.tolerance) break;
    }

    w -= config.step_size * grad_w;
    b -= config.step_size * grad_b;

    if (!w.allFinite() || !std::isfinite(b))
      throw NonFiniteLoss("gradient descent diverged; reduce step_size");
  }

  const double final_loss = loss(X, y, w, b, config.l2);
  if (!std::isfinite(final_loss))
    throw NonFiniteLoss("training loss is not finite");

  LinearModel model;
  model.weights = std::move(w);
  model.intercept = b;
  model.link = link;
  return model;
}

}  // namespace

LinearModel train_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const GlmConfig& config, PrivacyAccountant* accountant) {
  return train_glm(
      X, y, config, accountant, LinkFunction::Identity,
      [](double z, double yi) { return z - yi; }, linear_loss);
}

LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const GlmConfig& config,
                           PrivacyAccountant* accountant) {
  bool has_zero = false, has_one = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0.0)
      has_zero = true;
    else if (y(i) == 1.0)
      has_one = true;
    else
      throw InvalidParams("logistic labels must be 0 or 1");
  }
  if (!has_zero || !has_one)
    throw SingleClass("logistic training needs both classes present");
  return train_glm(
      X, y, config, accountant, LinkFunction::Logit,
      [](double z, double yi) { return sigmoid(z) - yi; }, logistic_loss);
}

}  // namespace dpcm
