#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dpcm/data/loan.hpp"
#include "dpcm/privacy/accountant.hpp"
#include "dpcm/rng.hpp"
#include "json.hpp"

namespace dpcm {

enum class FitMode { Exact, Private };

/// Public per-column clipping bounds. These come from schema knowledge, never
/// from the data: they cap sensitivity for DP queries and parameterize random
/// tree splits without spending budget.
struct SchemaBounds {
  std::map<std::string, ClippingBounds> by_column;

  static SchemaBounds defaults();
  const ClippingBounds& at(const std::string& column) const;
  bool has(const std::string& column) const { return by_column.count(column) > 0; }
};

/// Column-oriented view of a dataset mid-pipeline. Missing numerics are NaN.
struct NumericColumn {
  std::string name;
  std::vector<double> values;
};

struct CategoricalColumn {
  std::string name;
  std::vector<std::string> values;
};

struct ColumnTable {
  std::size_t rows = 0;
  std::vector<NumericColumn> numeric;
  std::vector<CategoricalColumn> categorical;

  const NumericColumn* find_numeric(const std::string& name) const;
  const CategoricalColumn* find_categorical(const std::string& name) const;
};

/// Feature columns of a dataset in schema order; currency is expressed in
/// dollars. Outcome fields (loan_status, recovered principal, recoveries)
/// never enter the table — they only feed target computation.
ColumnTable table_from_dataset(const Dataset& dataset);

// --- Fitted step parameter blocks -----------------------------------------

struct BinStep {
  std::string column;
  std::map<std::string, std::string> table;
  std::string fallback;
  std::vector<std::string> vocabulary;  // bin labels in output order

  const std::string& map(const std::string& value) const {
    const auto it = table.find(value);
    return it == table.end() ? fallback : it->second;
  }
};

struct DropStep {
  std::vector<std::string> names;
};

struct CorrelationStep {
  double threshold = 0.85;
  std::vector<std::string> dropped;
};

struct ImputeStep {
  std::vector<std::pair<std::string, double>> values;  // column -> fill value
};

struct OneHotStep {
  struct ColumnVocab {
    std::string column;
    std::vector<std::string> vocabulary;
  };
  std::vector<ColumnVocab> columns;
};

enum class StepKind {
  BinCategorical,
  DropColumns,
  CorrelationFilter,
  MedianImpute,
  OneHot
};

struct TransformStep {
  StepKind kind;
  std::variant<BinStep, DropStep, CorrelationStep, ImputeStep, OneHotStep> params;
};

// --- Step fitting (the module-level operations) ----------------------------

/// Fixed, data-independent bin tables: states fold into the four census
/// regions plus OTHER; home ownership keeps its four labels with OTHER as the
/// catch-all; purposes fold into {debt, credit_card, home, major_purchase,
/// other}. Zero privacy cost. Throws UnknownColumn for anything else.
TransformStep fit_binning(const std::string& column);

TransformStep fit_drop_columns(std::vector<std::string> names);

/// Per-column imputation value: exact median, or dp_median in private mode
/// (epsilon_total split equally across columns, one accountant debit).
TransformStep fit_median_impute(const ColumnTable& table,
                                const std::vector<std::string>& columns,
                                const SchemaBounds& bounds, FitMode mode,
                                double epsilon_total,
                                PrivacyAccountant* accountant, Rng* rng);

/// Pairwise Pearson correlations over the numeric columns; for each pair with
/// |r| above the threshold the later column in schema order is dropped. In
/// private mode each pair is estimated from five dp_sum moment queries over
/// bounds-normalized values (epsilon_total split equally across pairs, then
/// across the five sums), one accountant debit.
TransformStep fit_correlation_filter(const ColumnTable& table, double threshold,
                                     const SchemaBounds& bounds, FitMode mode,
                                     double epsilon_total,
                                     PrivacyAccountant* accountant, Rng* rng);

/// One-hot expansion over fixed bin vocabularies, deterministic column order;
/// values outside the vocabulary map to all-zeros.
TransformStep fit_one_hot(std::vector<OneHotStep::ColumnVocab> columns);

// --- Pipeline ---------------------------------------------------------------

struct PipelineConfig {
  FitMode mode = FitMode::Exact;
  std::vector<std::string> drop_columns = {"loan_amount", "zip_code",
                                           "member_id"};
  std::vector<std::string> bin_columns = {"state", "home_ownership", "purpose"};
  /// Empty means every numeric column present after the drop step.
  std::vector<std::string> impute_columns;
  double correlation_threshold = 0.85;
  bool correlation_filter = true;
  SchemaBounds bounds = SchemaBounds::defaults();
  /// Private-mode fit budget for the whole pipeline (split between the
  /// imputation and correlation statistics).
  double epsilon = 0.0;
};

/// Model-ready matrix. Targets ride alongside: default_label is 0/1; the CCF
/// and recovery-rate targets are NaN for non-defaulted records.
struct FeatureMatrix {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;
  std::vector<ClippingBounds> column_bounds;

  Eigen::VectorXd default_label;
  Eigen::VectorXd ccf_target;
  Eigen::VectorXd recovery_rate_target;

  std::vector<std::string> member_ids;
  std::vector<Cents> funded_cents;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Ordered, replayable preprocessing recipe. All data-dependent statistics
/// are computed at fit time (debiting the accountant in private mode); apply
/// is deterministic, exact, and spends nothing.
class Pipeline {
 public:
  Pipeline() = default;
  explicit Pipeline(PipelineConfig config) : config_(std::move(config)) {}

  void fit(const Dataset& dataset, PrivacyAccountant* accountant = nullptr,
           std::uint64_t seed = 0);

  FeatureMatrix apply(const Dataset& dataset) const;

  bool fitted() const { return fitted_; }
  FitMode mode() const { return config_.mode; }
  const PipelineConfig& config() const { return config_; }
  const std::vector<TransformStep>& steps() const { return steps_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  nlohmann::json to_json() const;
  static Pipeline from_json(const nlohmann::json& doc);

 private:
  PipelineConfig config_;
  std::vector<TransformStep> steps_;
  std::vector<std::string> warnings_;
  bool fitted_ = false;
};

}  // namespace dpcm
