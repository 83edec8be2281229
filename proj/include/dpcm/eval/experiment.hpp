#pragma once

#include <filesystem>
#include <vector>

#include "dpcm/credit/model.hpp"
#include "dpcm/data/sampling.hpp"
#include "json.hpp"

namespace dpcm {

struct StageTimings {
  double preprocess_s = 0.0;
  double train_s = 0.0;
  double predict_s = 0.0;
};

/// One subsample run: exact and DP actual totals, predicted totals for both
/// variants, relative differences, wall-clock timings.
struct RunReport {
  int run_id = 0;
  Cents actual_total = 0;
  Cents dp_actual_total = 0;
  Cents predicted_total_ndpm = 0;
  Cents predicted_total_dpm = 0;
  double rel_diff_ndpm = 0.0;
  double rel_diff_dpm = 0.0;
  StageTimings ndpm_timings;
  StageTimings dpm_timings;
};

struct AggregateSide {
  double avg_actual_dollars = 0.0;
  double avg_predicted_dollars = 0.0;
  double avg_rel_diff = 0.0;
};

/// Column-wise arithmetic means. The non-private side averages the exact
/// actual totals; the private side averages the DP actual totals.
struct AggregateReport {
  AggregateSide ndpm;
  AggregateSide dpm;
  int runs = 0;
};

/// 100 * (actual - predicted) / predicted. Requires predicted > 0.
double relative_difference(Cents actual, Cents predicted);

struct ExperimentConfig {
  int n_runs = 8;
  double subsample_fraction = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;

  /// The default protocol trains and predicts on the same subsample.
  /// Holdout mode splits first and scores the held-out part instead.
  bool holdout = false;
  SplitSpec holdout_split{0.8, 0};

  /// Per-run private budget. The DP actual-loss total takes
  /// actual_total_epsilon off the top; the remainder is split across the
  /// training stages by the plan.
  PrivacyParams budget{8.0, 1e-5};
  BudgetPlan plan;
  double actual_total_epsilon = 1.0;
  ClippingBounds loss_bounds{0.0, 40000.0};  // per-record actual loss, dollars

  CreditRiskConfig ndpm;  // trained exactly
  CreditRiskConfig dpm;   // trained privately with a fresh accountant per run
};

/// The repeated-subsample comparison: for each run, draw a subsample with
/// seed xor run_id, train both variants on it, predict, and record totals
/// and timings. Errors are rethrown tagged with the run id.
std::vector<RunReport> run_experiment(const Dataset& dataset,
                                      const ExperimentConfig& config);

AggregateReport aggregate(const std::vector<RunReport>& reports);

/// run + the six value columns; whole dollars, percents at three decimals.
void write_runs_csv(const std::vector<RunReport>& reports,
                    const std::filesystem::path& path);

/// Whole-dollar averages, percent averages truncated to two decimals.
nlohmann::json aggregate_to_json(const AggregateReport& report);

/// Full per-run detail including timings (cent-precision totals).
nlohmann::json reports_to_json(const std::vector<RunReport>& reports);

/// figure_actual_loss.csv, figure_predicted_loss.csv and
/// figure_relative_difference.csv under directory, each run,ndpm,dpm.
void emit_figure_data(const std::vector<RunReport>& reports,
                      const std::filesystem::path& directory);

/// Externally supplied run totals (columns run, actual_total_exact,
/// actual_total_dp, predicted_total_ndpm, predicted_total_dpm); relative
/// differences are recomputed, timings are zero.
std::vector<RunReport> read_replay_csv(const std::filesystem::path& path);

struct TimingSummary {
  StageTimings ndpm_mean;
  StageTimings dpm_mean;
  // dpm/ndpm ratios; NaN when the denominator is zero.
  double preprocess_ratio = 0.0;
  double train_ratio = 0.0;
  double predict_ratio = 0.0;
};

TimingSummary timing_summary(const std::vector<RunReport>& reports);
nlohmann::json timing_summary_to_json(const TimingSummary& summary);
std::string timing_summary_text(const TimingSummary& summary);

}  // namespace dpcm
