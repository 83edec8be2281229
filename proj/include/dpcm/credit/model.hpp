#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dpcm/credit/formulas.hpp"
#include "dpcm/learn/forest.hpp"
#include "dpcm/learn/gbt.hpp"
#include "dpcm/preprocess/pipeline.hpp"

namespace dpcm {

/// Per-record loss factors. expected_loss = pd * ead * lgd, in cents.
struct LossBreakdown {
  std::string member_id;
  double pd = 0.0;
  Cents ead = 0;
  double lgd = 0.0;
  Cents expected_loss = 0;
};

/// The three-component credit model: a PD classifier, a CCF regressor and
/// the two-stage LGD pair, all trained on matrices from one fitted pipeline.
struct CreditRiskModel {
  Pipeline pipeline;
  GbtModel pd_model;
  ForestModel ccf_model;
  GbtModel lgd_nonzero_model;
  ForestModel lgd_rate_model;
  TrainMode mode = TrainMode::Exact;
};

/// Absolute (epsilon, delta) shares per training stage, used in private mode.
struct StageBudgets {
  PrivacyParams preprocess{};
  PrivacyParams pd{};
  PrivacyParams ccf{};
  PrivacyParams lgd{};  // split evenly across the two LGD models
};

/// Fractional budget plan over the training stages.
struct BudgetPlan {
  double preprocess = 0.25;
  double pd = 0.25;
  double ccf = 0.25;
  double lgd = 0.25;

  void validate() const;
};

StageBudgets budgets_from_plan(const PrivacyParams& total, const BudgetPlan& plan);

struct CreditRiskConfig {
  TrainMode mode = TrainMode::Exact;
  SplitStrategy split_strategy = SplitStrategy::Greedy;
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
  GbtConfig pd;
  ForestConfig ccf;
  GbtConfig lgd_nonzero;
  ForestConfig lgd_rate;
  StageBudgets budgets;  // required when mode == Private
};

struct TrainedCreditRisk {
  CreditRiskModel model;
  double preprocess_seconds = 0.0;
  double train_seconds = 0.0;
};

/// Fits the pipeline and trains all four component models. mode, strategy,
/// seeds and budget shares from the config override the per-model settings.
/// CCF and the LGD pair train on the defaulted subset (the rate model on the
/// subset with positive recovery rate).
TrainedCreditRisk train_credit_risk(const Dataset& dataset,
                                    const CreditRiskConfig& config,
                                    PrivacyAccountant* accountant = nullptr);

std::vector<LossBreakdown> predict_losses(const CreditRiskModel& model,
                                          const Dataset& dataset);

Cents total_expected_loss(std::span<const LossBreakdown> breakdowns);

/// member_id,pd,ead,lgd,expected_loss with currency at two decimals.
void write_loss_csv(std::span<const LossBreakdown> breakdowns,
                    const std::filesystem::path& path);

}  // namespace dpcm
