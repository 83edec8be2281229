#include "dpcm/credit/model.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"

namespace dpcm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Stream tags for the per-stage rng/seed derivation.
constexpr std::uint64_t kPipelineTag = 0x70495045ULL;      // "pIPE"
constexpr std::uint64_t kPdTag = 0x7044ULL;                // "pD"
constexpr std::uint64_t kCcfTag = 0x434346ULL;             // "CCF"
constexpr std::uint64_t kLgdNonzeroTag = 0x4C47444EULL;    // "LGDN"
constexpr std::uint64_t kLgdRateTag = 0x4C474452ULL;       // "LGDR"

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

void BudgetPlan::validate() const {
  for (double f : {preprocess, pd, ccf, lgd})
    if (!(f >= 0.0) || !std::isfinite(f))
      throw InvalidConfig("budget plan fractions must be nonnegative");
  if (preprocess + pd + ccf + lgd > 1.0 + 1e-12)
    throw InvalidConfig("budget plan fractions must sum to at most 1");
}

StageBudgets budgets_from_plan(const PrivacyParams& total,
                               const BudgetPlan& plan) {
  plan.validate();
  return {{total.epsilon * plan.preprocess, total.delta * plan.preprocess},
          {total.epsilon * plan.pd, total.delta * plan.pd},
          {total.epsilon * plan.ccf, total.delta * plan.ccf},
          {total.epsilon * plan.lgd, total.delta * plan.lgd}};
}

TrainedCreditRisk train_credit_risk(const Dataset& dataset,
                                    const CreditRiskConfig& config,
                                    PrivacyAccountant* accountant) {
  if (dataset.empty()) throw EmptyInput("training dataset is empty");
  const bool priv = config.mode == TrainMode::Private;
  if (priv && accountant == nullptr)
    throw InvalidConfig("private training requires an accountant");

  TrainedCreditRisk out;
  out.model.mode = config.mode;

  // Pipeline fit, then one matrix reused by all four trainers.
  const auto t_pre = Clock::now();
  PipelineConfig pipeline_config = config.pipeline;
  pipeline_config.mode = priv ? FitMode::Private : FitMode::Exact;
  if (priv) pipeline_config.epsilon = config.budgets.preprocess.epsilon;
  out.model.pipeline = Pipeline(pipeline_config);
  out.model.pipeline.fit(dataset, accountant, config.seed ^ kPipelineTag);
  const FeatureMatrix matrix = out.model.pipeline.apply(dataset);
  out.preprocess_seconds = seconds_since(t_pre);

  const auto t_train = Clock::now();
  const SplitStrategy strategy =
      priv ? SplitStrategy::Random : config.split_strategy;

  GbtConfig pd_config = config.pd;
  pd_config.mode = config.mode;
  pd_config.split_strategy = strategy;
  pd_config.seed = config.seed ^ kPdTag;
  pd_config.budget = config.budgets.pd;
  pd_config.budget_query_id = "train/pd";
  out.model.pd_model = train_gbt(matrix.values, matrix.default_label, pd_config,
                                 matrix.column_bounds, accountant);

  std::vector<Eigen::Index> defaulted;
  std::vector<Eigen::Index> positive_recovery;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    if (matrix.default_label(i) != 1.0) continue;
    defaulted.push_back(i);
    if (matrix.recovery_rate_target(i) > 0.0) positive_recovery.push_back(i);
  }
  if (defaulted.empty())
    throw EmptyInput("no defaulted records; cannot train CCF/LGD models");

  const Eigen::MatrixXd X_default = select_rows(matrix.values, defaulted);

  ForestConfig ccf_config = config.ccf;
  ccf_config.mode = config.mode;
  ccf_config.split_strategy = strategy;
  ccf_config.seed = config.seed ^ kCcfTag;
  ccf_config.budget = config.budgets.ccf;
  ccf_config.budget_query_id = "train/ccf";
  ccf_config.label_bounds = {0.0, 1.0};
  out.model.ccf_model =
      train_random_forest(X_default, select_rows(matrix.ccf_target, defaulted),
                          ccf_config, matrix.column_bounds, accountant);

  Eigen::VectorXd nonzero_label(static_cast<Eigen::Index>(defaulted.size()));
  for (std::size_t i = 0; i < defaulted.size(); ++i)
    nonzero_label(static_cast<Eigen::Index>(i)) =
        matrix.recovery_rate_target(defaulted[i]) > 0.0 ? 1.0 : 0.0;

  GbtConfig lgd_nz_config = config.lgd_nonzero;
  lgd_nz_config.mode = config.mode;
  lgd_nz_config.split_strategy = strategy;
  lgd_nz_config.seed = config.seed ^ kLgdNonzeroTag;
  lgd_nz_config.budget = {config.budgets.lgd.epsilon / 2.0,
                          config.budgets.lgd.delta / 2.0};
  lgd_nz_config.budget_query_id = "train/lgd_nonzero";
  out.model.lgd_nonzero_model = train_gbt(X_default, nonzero_label, lgd_nz_config,
                                          matrix.column_bounds, accountant);

  if (positive_recovery.empty())
    throw EmptyInput("no records with positive recovery rate; cannot train "
                     "the LGD rate model");
  ForestConfig lgd_rate_config = config.lgd_rate;
  lgd_rate_config.mode = config.mode;
  lgd_rate_config.split_strategy = strategy;
  lgd_rate_config.seed = config.seed ^ kLgdRateTag;
  lgd_rate_config.budget = {config.budgets.lgd.epsilon / 2.0,
                            config.budgets.lgd.delta / 2.0};
  lgd_rate_config.budget_query_id = "train/lgd_rate";
  lgd_rate_config.label_bounds = {0.0, 1.0};
  out.model.lgd_rate_model = train_random_forest(
      select_rows(matrix.values, positive_recovery),
      select_rows(matrix.recovery_rate_target, positive_recovery),
      lgd_rate_config, matrix.column_bounds, accountant);

  out.train_seconds = seconds_since(t_train);
  return out;
}

std::vector<LossBreakdown> predict_losses(const CreditRiskModel& model,
                                          const Dataset& dataset) {
  const FeatureMatrix matrix = model.pipeline.apply(dataset);
  const Eigen::VectorXd pd = model.pd_model.predict(matrix.values);
  const Eigen::VectorXd ccf_hat = model.ccf_model.predict(matrix.values);
  const Eigen::VectorXd p_nonzero = model.lgd_nonzero_model.predict(matrix.values);
  const Eigen::VectorXd rate = model.lgd_rate_model.predict(matrix.values);

  std::vector<LossBreakdown> out;
  out.reserve(static_cast<std::size_t>(matrix.rows()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    LossBreakdown b;
    b.member_id = matrix.member_ids[static_cast<std::size_t>(i)];
    b.pd = pd(i);
    b.ead = predicted_ead(matrix.funded_cents[static_cast<std::size_t>(i)],
                          ccf_hat(i));
    const double predicted_recovery =
        std::clamp(p_nonzero(i) * std::clamp(rate(i), 0.0, 1.0), 0.0, 1.0);
    b.lgd = lgd(predicted_recovery);
    b.expected_loss = static_cast<Cents>(
        std::llround(b.pd * static_cast<double>(b.ead) * b.lgd));
    out.push_back(std::move(b));
  }
  return out;
}

Cents total_expected_loss(std::span<const LossBreakdown> breakdowns) {
  Cents total = 0;
  for (const auto& b : breakdowns) total += b.expected_loss;
  return total;
}

void write_loss_csv(std::span<const LossBreakdown> breakdowns,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << "member_id,pd,ead,lgd,expected_loss\n";
  for (const auto& b : breakdowns) {
    out << b.member_id << ',' << format_double_shortest(b.pd) << ','
        << format_currency(b.ead) << ',' << format_double_shortest(b.lgd)
        << ',' << format_currency(b.expected_loss) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace dpcm
