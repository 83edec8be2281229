// dpcm — differentially private credit risk modeling engine.
//
// Subcommands: generate, ingest-check, train, evaluate, predict, budget,
// export. Exit codes: 0 success, 2 usage, 3 privacy budget exhausted,
// 4 training failure, 5 schema/data mismatch, 1 anything else.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpcm/data/csv.hpp"
#include "dpcm/data/synthetic.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/eval/experiment.hpp"
#include "dpcm/io_util.hpp"
#include "dpcm/model_io/portable.hpp"
#include "dpcm/run_config.hpp"

namespace {

using namespace dpcm;

int g_verbosity = 1;  // 0 = errors only, 1 = info

void info(const std::string& line) {
  if (g_verbosity >= 1) std::cout << line << "\n";
}

struct GlobalFlags {
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = 0;
  std::string log_level = "info";
};

void apply_global_overrides(RunConfig& cfg, const GlobalFlags& flags) {
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.threads > 0) cfg.threads = flags.threads;
}

DocumentMetadata metadata_for(const RunConfig& cfg, bool private_mode,
                              const PrivacyAccountant* accountant) {
  DocumentMetadata meta;
  meta.trained_mode = private_mode ? "private" : "exact";
  meta.seed = cfg.seed;
  if (accountant) {
    meta.epsilon_spent = accountant->spent().epsilon;
    meta.delta_spent = accountant->spent().delta;
    meta.ledger_entries = accountant->ledger().size();
  }
  return meta;
}

int cmd_generate(std::size_t n, std::uint64_t seed, const std::string& out,
                 double default_rate, double recovery_prob, double missing_rate) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.default_rate = default_rate;
  cfg.recovery_positive_prob = recovery_prob;
  cfg.missing_rate = missing_rate;
  const Dataset ds = generate_synthetic(cfg);
  write_csv(ds, out);
  info("wrote " + std::to_string(ds.size()) + " records to " + out);
  return 0;
}

int cmd_ingest_check(const std::string& in, bool strict) {
  const LoadResult result = load_csv(in, strict);
  info("parsed " + std::to_string(result.rows_parsed) + " records (" +
       std::to_string(result.rows_skipped) + " skipped)");
  for (const auto& w : result.warnings) info("  warning: " + w);
  return 0;
}

int cmd_train(const std::string& config_path, const GlobalFlags& flags) {
  RunConfig cfg = load_run_config(config_path);
  apply_global_overrides(cfg, flags);
  const Dataset dataset = load_input_dataset(cfg);
  const auto [train_set, test_set] = split(dataset, cfg.split);
  info("training on " + std::to_string(train_set.size()) + " of " +
       std::to_string(dataset.size()) + " records");

  const bool priv = cfg.has_privacy;
  CreditRiskConfig credit = make_credit_config(cfg, priv);

  std::optional<PrivacyAccountant> accountant;
  if (priv) {
    accountant.emplace(cfg.privacy);
    credit.budgets = budgets_from_plan(cfg.privacy, cfg.plan);
  }

  const TrainedCreditRisk trained =
      train_credit_risk(train_set, credit, priv ? &*accountant : nullptr);

  const FeatureMatrix matrix = trained.model.pipeline.apply(train_set);
  const nlohmann::json doc = document_from_bundle(
      trained.model, matrix.column_names,
      metadata_for(cfg, priv, priv ? &*accountant : nullptr));
  const auto model_path = cfg.output_dir / "model.dpcm.json";
  export_model(doc, model_path);

  const auto ledger_path = cfg.output_dir / "ledger.json";
  write_file_atomic(ledger_path,
                    priv ? accountant->ledger_json() + "\n" : "[]\n");

  info("model written to " + model_path.string());
  info("ledger written to " + ledger_path.string());
  if (priv) {
    std::cout << accountant->report();
  } else {
    info("exact mode: no privacy budget spent");
  }
  return 0;
}

void write_evaluation_outputs(const std::vector<RunReport>& reports,
                              const std::filesystem::path& dir) {
  write_runs_csv(reports, dir / "runs.csv");
  const AggregateReport agg = aggregate(reports);
  write_file_atomic(dir / "aggregate.json",
                    aggregate_to_json(agg).dump(2) + "\n");
  write_file_atomic(dir / "reports.json",
                    reports_to_json(reports).dump(2) + "\n");
  emit_figure_data(reports, dir);
  const TimingSummary timing = timing_summary(reports);
  write_file_atomic(dir / "timing_summary.json",
                    timing_summary_to_json(timing).dump(2) + "\n");

  info("runs: " + std::to_string(agg.runs));
  char line[256];
  std::snprintf(line, sizeof(line),
                "NDPM  avg actual $%lld  avg predicted $%lld  avg rel diff %s",
                std::llround(agg.ndpm.avg_actual_dollars),
                std::llround(agg.ndpm.avg_predicted_dollars),
                format_truncated(agg.ndpm.avg_rel_diff, 2).c_str());
  info(line);
  std::snprintf(line, sizeof(line),
                "DPM   avg actual $%lld  avg predicted $%lld  avg rel diff %s",
                std::llround(agg.dpm.avg_actual_dollars),
                std::llround(agg.dpm.avg_predicted_dollars),
                format_truncated(agg.dpm.avg_rel_diff, 2).c_str());
  info(line);
  if (g_verbosity >= 1) std::cout << timing_summary_text(timing);
}

int cmd_evaluate(const std::string& config_path, const std::string& replay,
                 const GlobalFlags& flags) {
  RunConfig cfg = load_run_config(config_path);
  apply_global_overrides(cfg, flags);
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<RunReport> reports;
  if (!replay.empty()) {
    reports = read_replay_csv(replay);
    info("replayed " + std::to_string(reports.size()) + " runs from " + replay);
  } else {
    const Dataset dataset = load_input_dataset(cfg);
    reports = run_experiment(dataset, make_experiment_config(cfg));
  }
  write_evaluation_outputs(reports, cfg.output_dir);
  return 0;
}

int cmd_predict(const std::string& model, const std::string& in,
                const std::string& out) {
  standalone_predict(model, in, out);
  info("predictions written to " + out);
  return 0;
}

int cmd_budget(const std::string& ledger_path, double epsilon, double delta) {
  nlohmann::json ledger;
  try {
    ledger = nlohmann::json::parse(read_file(ledger_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedDocument("ledger is not valid JSON: " + std::string(e.what()));
  }
  if (!ledger.is_array())
    throw MalformedDocument("ledger must be a JSON array");
  double spent_eps = 0.0, spent_delta = 0.0;
  for (const auto& entry : ledger) {
    spent_eps += entry.at("epsilon").get<double>();
    spent_delta += entry.at("delta").get<double>();
  }
  std::cout << "queries:   " << ledger.size() << "\n";
  std::cout << "spent:     epsilon=" << format_double_shortest(spent_eps)
            << " delta=" << format_double_shortest(spent_delta) << "\n";
  if (epsilon > 0.0) {
    std::cout << "budget:    epsilon=" << format_double_shortest(epsilon)
              << " delta=" << format_double_shortest(delta) << "\n";
    std::cout << "remaining: epsilon="
              << format_double_shortest(epsilon - spent_eps)
              << " delta=" << format_double_shortest(delta - spent_delta)
              << "\n";
    if (spent_eps > epsilon || spent_delta > delta)
      std::cout << "WARNING: ledger exceeds the stated budget\n";
  }
  for (const auto& entry : ledger) {
    std::cout << "  " << entry.at("timestamp").get<std::string>() << "  eps="
              << format_double_shortest(entry.at("epsilon").get<double>())
              << "  " << entry.at("query_id").get<std::string>() << "\n";
  }
  return 0;
}

int cmd_export(const std::string& model_path, const std::string& component,
               const std::string& out) {
  const ImportedModel bundle = import_model(model_path);
  if (bundle.kind != ModelKind::CreditRiskBundle)
    throw InvalidConfig("export expects a credit_risk_bundle document");
  DocumentMetadata meta = bundle.metadata;
  const Pipeline* pipeline = bundle.pipeline ? &*bundle.pipeline : nullptr;
  nlohmann::json doc;
  if (component == "pd") {
    doc = document_from_gbt(bundle.pd, bundle.column_names, meta, pipeline);
  } else if (component == "ccf") {
    doc = document_from_forest(bundle.ccf, bundle.column_names, meta, pipeline);
  } else if (component == "lgd_nonzero") {
    doc = document_from_gbt(bundle.lgd_nonzero, bundle.column_names, meta,
                            pipeline);
  } else if (component == "lgd_rate") {
    doc = document_from_forest(bundle.lgd_rate, bundle.column_names, meta,
                               pipeline);
  } else {
    throw InvalidConfig("unknown component '" + component +
                        "' (expected pd, ccf, lgd_nonzero or lgd_rate)");
  }
  export_model(doc, out);
  info("exported " + component + " to " + out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpcm: differentially private credit risk modeling"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--out-dir", flags.out_dir, "Override the output directory");
  app.add_option("--seed", flags.seed, "Override the master seed");
  app.add_option("--threads", flags.threads, "Override the thread count");
  app.add_option("--log-level", flags.log_level,
                 "error or info (default info)");

  // generate
  auto* generate = app.add_subcommand("generate", "Write a synthetic loan CSV");
  std::uint64_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "data.csv";
  double gen_default_rate = 0.12, gen_recovery_prob = 0.6, gen_missing = 0.03;
  generate->add_option("--n", gen_n, "Record count")
      ->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output CSV path")->required();
  generate->add_option("--default-rate", gen_default_rate,
                       "Fraction of defaulted loans");
  generate->add_option("--recovery-prob", gen_recovery_prob,
                       "P(recoveries > 0 | defaulted)");
  generate->add_option("--missing-rate", gen_missing,
                       "Per-field null probability for income/dti");

  // ingest-check
  auto* ingest = app.add_subcommand("ingest-check", "Validate a loan CSV");
  std::string ingest_in;
  bool ingest_strict = false;
  ingest->add_option("--in", ingest_in, "Input CSV")->required();
  ingest->add_flag("--strict", ingest_strict, "Fail on the first bad row");

  // train
  auto* train = app.add_subcommand("train", "Train and export a model bundle");
  std::string train_config;
  train->add_option("--config", train_config, "Run config JSON")->required();

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "Run the DPM-vs-NDPM experiment");
  std::string eval_config, eval_replay;
  evaluate->add_option("--config", eval_config, "Run config JSON")->required();
  evaluate->add_option("--replay", eval_replay,
                       "Aggregate externally supplied run totals instead of "
                       "training");

  // predict
  auto* predict = app.add_subcommand("predict", "Score a CSV with a model");
  std::string pred_model, pred_in, pred_out;
  predict->add_option("--model", pred_model, "Portable model document")
      ->required();
  predict->add_option("--in", pred_in, "Input CSV")->required();
  predict->add_option("--out", pred_out, "Output CSV")->required();

  // budget
  auto* budget = app.add_subcommand("budget", "Report spend from a ledger");
  std::string budget_ledger;
  double budget_eps = 0.0, budget_delta = 0.0;
  budget->add_option("--ledger", budget_ledger, "ledger.json path")->required();
  budget->add_option("--epsilon", budget_eps, "Budget epsilon to compare");
  budget->add_option("--delta", budget_delta, "Budget delta to compare");

  // export
  auto* exportc =
      app.add_subcommand("export", "Extract one component from a bundle");
  std::string export_model_path, export_component, export_out;
  exportc->add_option("--model", export_model_path, "Bundle document")
      ->required();
  exportc
      ->add_option("--component", export_component,
                   "pd, ccf, lgd_nonzero or lgd_rate")
      ->required();
  exportc->add_option("--out", export_out, "Output document path")->required();

  // Global flags remain usable after the subcommand name.
  for (CLI::App* sub : {generate, ingest, train, evaluate, predict, budget,
                        exportc})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  g_verbosity = flags.log_level == "error" ? 0 : 1;

  try {
    if (*generate)
      return cmd_generate(gen_n, gen_seed, gen_out, gen_default_rate,
                          gen_recovery_prob, gen_missing);
    if (*ingest) return cmd_ingest_check(ingest_in, ingest_strict);
    if (*train) return cmd_train(train_config, flags);
    if (*evaluate) return cmd_evaluate(eval_config, eval_replay, flags);
    if (*predict) return cmd_predict(pred_model, pred_in, pred_out);
    if (*budget) return cmd_budget(budget_ledger, budget_eps, budget_delta);
    if (*exportc)
      return cmd_export(export_model_path, export_component, export_out);
  } catch (const BudgetExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SingleClass& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const EmptyInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const UnknownColumn& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const SchemaMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const RecordInvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const WidthMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidFraction& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
