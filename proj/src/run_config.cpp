#include "dpcm/run_config.hpp"

#include <set>

#include "dpcm/data/csv.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"

namespace dpcm {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object())
    throw InvalidConfig("config section '" + path + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key))
      throw InvalidConfig("unknown key '" + path + "." + key + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

void parse_gbt(const nlohmann::json& j, const std::string& path, GbtConfig& out) {
  check_keys(j, {"rounds", "depth", "learning_rate", "lambda"}, path);
  out.num_rounds = get_or(j, "rounds", out.num_rounds);
  out.max_depth = get_or(j, "depth", out.max_depth);
  out.learning_rate = get_or(j, "learning_rate", out.learning_rate);
  out.lambda = get_or(j, "lambda", out.lambda);
}

void parse_forest(const nlohmann::json& j, const std::string& path,
                  ForestConfig& out) {
  check_keys(j, {"trees", "depth"}, path);
  out.num_trees = get_or(j, "trees", out.num_trees);
  out.max_depth = get_or(j, "depth", out.max_depth);
}

void parse_model_set(const nlohmann::json& j, const std::string& path,
                     ModelSet& out) {
  if (j.contains("pd")) parse_gbt(j["pd"], path + ".pd", out.pd);
  if (j.contains("ccf")) parse_forest(j["ccf"], path + ".ccf", out.ccf);
  if (j.contains("lgd_nonzero"))
    parse_gbt(j["lgd_nonzero"], path + ".lgd_nonzero", out.lgd_nonzero);
  if (j.contains("lgd_rate"))
    parse_forest(j["lgd_rate"], path + ".lgd_rate", out.lgd_rate);
}

}  // namespace

ModelSet default_model_set() {
  ModelSet m;
  m.pd = GbtConfig{};
  m.ccf = ForestConfig{};
  m.lgd_nonzero = GbtConfig{};
  m.lgd_rate = ForestConfig{};
  return m;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  check_keys(doc,
             {"data", "split", "privacy", "models", "preprocess", "evaluation",
              "output", "seed"},
             "$");
  RunConfig cfg;
  cfg.models = default_model_set();

  if (!doc.contains("data"))
    throw InvalidConfig("config requires a 'data' section");
  const nlohmann::json& data = doc["data"];
  check_keys(data, {"source", "synthetic"}, "$.data");
  if (data.contains("source") == data.contains("synthetic"))
    throw InvalidConfig(
        "$.data must contain exactly one of 'source' or 'synthetic'");
  if (data.contains("source")) {
    cfg.source_path = std::filesystem::path(data["source"].get<std::string>());
  } else {
    const nlohmann::json& syn = data["synthetic"];
    check_keys(syn,
               {"n", "seed", "default_rate", "recovery_positive_prob",
                "missing_rate"},
               "$.data.synthetic");
    SyntheticConfig s;
    if (!syn.contains("n"))
      throw InvalidConfig("$.data.synthetic.n is required");
    s.n = syn["n"].get<std::size_t>();
    s.seed = get_or<std::uint64_t>(syn, "seed", 0);
    s.default_rate = get_or(syn, "default_rate", s.default_rate);
    s.recovery_positive_prob =
        get_or(syn, "recovery_positive_prob", s.recovery_positive_prob);
    s.missing_rate = get_or(syn, "missing_rate", s.missing_rate);
    cfg.synthetic = s;
  }

  if (doc.contains("split")) {
    const nlohmann::json& split = doc["split"];
    check_keys(split, {"train_fraction", "seed"}, "$.split");
    cfg.split.train_fraction =
        get_or(split, "train_fraction", cfg.split.train_fraction);
    cfg.split.seed = get_or<std::uint64_t>(split, "seed", cfg.split.seed);
  }

  if (doc.contains("privacy")) {
    cfg.has_privacy = true;
    const nlohmann::json& privacy = doc["privacy"];
    check_keys(privacy,
               {"epsilon", "delta", "budget_plan", "actual_total_epsilon"},
               "$.privacy");
    cfg.privacy.epsilon = get_or(privacy, "epsilon", cfg.privacy.epsilon);
    cfg.privacy.delta = get_or(privacy, "delta", cfg.privacy.delta);
    cfg.privacy.validate();
    if (privacy.contains("budget_plan")) {
      const nlohmann::json& plan = privacy["budget_plan"];
      check_keys(plan, {"preprocess", "pd", "ccf", "lgd"},
                 "$.privacy.budget_plan");
      cfg.plan.preprocess = get_or(plan, "preprocess", cfg.plan.preprocess);
      cfg.plan.pd = get_or(plan, "pd", cfg.plan.pd);
      cfg.plan.ccf = get_or(plan, "ccf", cfg.plan.ccf);
      cfg.plan.lgd = get_or(plan, "lgd", cfg.plan.lgd);
      cfg.plan.validate();
    }
    cfg.actual_total_epsilon =
        get_or(privacy, "actual_total_epsilon", cfg.actual_total_epsilon);
  }

  if (doc.contains("models")) {
    const nlohmann::json& models = doc["models"];
    check_keys(models, {"pd", "ccf", "lgd_nonzero", "lgd_rate", "dpm_overrides"},
               "$.models");
    parse_model_set(models, "$.models", cfg.models);
    cfg.dpm_models = cfg.models;
    if (models.contains("dpm_overrides")) {
      const nlohmann::json& over = models["dpm_overrides"];
      check_keys(over, {"pd", "ccf", "lgd_nonzero", "lgd_rate"},
                 "$.models.dpm_overrides");
      parse_model_set(over, "$.models.dpm_overrides", cfg.dpm_models);
    }
  } else {
    cfg.dpm_models = cfg.models;
  }

  if (doc.contains("preprocess")) {
    const nlohmann::json& pre = doc["preprocess"];
    check_keys(pre, {"correlation_threshold", "correlation_filter"},
               "$.preprocess");
    cfg.correlation_threshold =
        get_or(pre, "correlation_threshold", cfg.correlation_threshold);
    cfg.correlation_filter =
        get_or(pre, "correlation_filter", cfg.correlation_filter);
  }

  if (doc.contains("evaluation")) {
    const nlohmann::json& eval = doc["evaluation"];
    check_keys(eval,
               {"n_runs", "subsample_fraction", "holdout", "threads",
                "loss_bound_dollars"},
               "$.evaluation");
    cfg.n_runs = get_or(eval, "n_runs", cfg.n_runs);
    cfg.subsample_fraction =
        get_or(eval, "subsample_fraction", cfg.subsample_fraction);
    cfg.holdout = get_or(eval, "holdout", cfg.holdout);
    cfg.threads = get_or(eval, "threads", cfg.threads);
    cfg.loss_bound_dollars =
        get_or(eval, "loss_bound_dollars", cfg.loss_bound_dollars);
  }

  if (doc.contains("output")) {
    const nlohmann::json& output = doc["output"];
    check_keys(output, {"directory"}, "$.output");
    if (output.contains("directory"))
      cfg.output_dir =
          std::filesystem::path(output["directory"].get<std::string>());
  }

  cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig("config is not valid JSON: " + std::string(e.what()));
  }
  try {
    return parse_run_config(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("config type error: " + std::string(e.what()));
  }
}

Dataset load_input_dataset(const RunConfig& config) {
  if (config.source_path) return load_csv(*config.source_path).dataset;
  return generate_synthetic(*config.synthetic);
}

CreditRiskConfig make_credit_config(const RunConfig& config, bool private_mode) {
  CreditRiskConfig cc;
  cc.mode = private_mode ? TrainMode::Private : TrainMode::Exact;
  cc.split_strategy =
      private_mode ? SplitStrategy::Random : SplitStrategy::Greedy;
  cc.seed = config.seed;
  const ModelSet& set = private_mode ? config.dpm_models : config.models;
  cc.pd = set.pd;
  cc.ccf = set.ccf;
  cc.lgd_nonzero = set.lgd_nonzero;
  cc.lgd_rate = set.lgd_rate;
  cc.pipeline.correlation_threshold = config.correlation_threshold;
  cc.pipeline.correlation_filter = config.correlation_filter;
  return cc;
}

ExperimentConfig make_experiment_config(const RunConfig& config) {
  if (!config.has_privacy)
    throw InvalidConfig(
        "evaluate requires a 'privacy' section for the DPM variant");
  ExperimentConfig ec;
  ec.n_runs = config.n_runs;
  ec.subsample_fraction = config.subsample_fraction;
  ec.seed = config.seed;
  ec.threads = config.threads;
  ec.holdout = config.holdout;
  ec.holdout_split = config.split;
  ec.budget = config.privacy;
  ec.plan = config.plan;
  ec.actual_total_epsilon = config.actual_total_epsilon;
  ec.loss_bounds = {0.0, config.loss_bound_dollars};
  ec.ndpm = make_credit_config(config, false);
  ec.dpm = make_credit_config(config, true);
  return ec;
}

}  // namespace dpcm
