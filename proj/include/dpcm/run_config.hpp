#pragma once

#include <filesystem>
#include <optional>

#include "dpcm/data/synthetic.hpp"
#include "dpcm/eval/experiment.hpp"

namespace dpcm {

struct ModelSet {
  GbtConfig pd;
  ForestConfig ccf;
  GbtConfig lgd_nonzero;
  ForestConfig lgd_rate;
};

/// Parsed run configuration file. A run is fully reproducible from this plus
/// nothing else: data source or generator settings, split, privacy budget
/// and plan, per-model hyperparameters, evaluation protocol, output paths.
/// Presence of the "privacy" section selects private training for `train`
/// and parameterizes the DPM variant for `evaluate`.
struct RunConfig {
  std::optional<std::filesystem::path> source_path;
  std::optional<SyntheticConfig> synthetic;

  SplitSpec split{0.8, 42};

  bool has_privacy = false;
  PrivacyParams privacy{8.0, 1e-5};
  BudgetPlan plan{};
  double actual_total_epsilon = 1.0;

  ModelSet models;
  ModelSet dpm_models;  // models with the dpm_overrides section applied

  double correlation_threshold = 0.85;
  bool correlation_filter = true;

  int n_runs = 8;
  double subsample_fraction = 0.5;
  bool holdout = false;
  int threads = 1;
  double loss_bound_dollars = 40000.0;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;
};

ModelSet default_model_set();

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads the CSV source or generates the synthetic portfolio.
Dataset load_input_dataset(const RunConfig& config);

CreditRiskConfig make_credit_config(const RunConfig& config, bool private_mode);
ExperimentConfig make_experiment_config(const RunConfig& config);

}  // namespace dpcm
