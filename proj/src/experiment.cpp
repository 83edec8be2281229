#include "dpcm/eval/experiment.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dpcm/data/csv.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"
#include "dpcm/privacy/mechanisms.hpp"

namespace dpcm {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kActualTotalTag = 0xAC74A17074A1ULL;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void rethrow_tagged(int run_id) {
  const std::string tag = "run " + std::to_string(run_id) + ": ";
  try {
    throw;
  } catch (const BudgetExhausted& e) {
    throw BudgetExhausted(tag + e.what());
  } catch (const SingleClass& e) {
    throw SingleClass(tag + e.what());
  } catch (const NonFiniteLoss& e) {
    throw NonFiniteLoss(tag + e.what());
  } catch (const EmptyInput& e) {
    throw EmptyInput(tag + e.what());
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(tag + e.what());
  } catch (const InvalidParams& e) {
    throw InvalidParams(tag + e.what());
  } catch (const Error& e) {
    throw Error(tag + e.what());
  }
}

RunReport execute_run(int run_id, const Dataset& train_base,
                      const Dataset* holdout_eval,
                      const ExperimentConfig& config) {
  RunReport report;
  report.run_id = run_id;

  const Dataset sample =
      subsample(train_base, config.subsample_fraction,
                config.seed ^ static_cast<std::uint64_t>(run_id));
  const Dataset& eval_set = holdout_eval ? *holdout_eval : sample;

  std::vector<double> losses_dollars;
  losses_dollars.reserve(eval_set.size());
  Cents actual_total = 0;
  for (const auto& r : eval_set.records) {
    const Cents loss = actual_loss(r);
    actual_total += loss;
    losses_dollars.push_back(dollars(loss));
  }
  report.actual_total = actual_total;

  // NDPM: exact training, no accountant.
  {
    CreditRiskConfig cfg = config.ndpm;
    cfg.mode = TrainMode::Exact;
    cfg.seed = config.seed ^ static_cast<std::uint64_t>(run_id);
    TrainedCreditRisk trained = train_credit_risk(sample, cfg, nullptr);
    report.ndpm_timings.preprocess_s = trained.preprocess_seconds;
    report.ndpm_timings.train_s = trained.train_seconds;
    const auto t_pred = Clock::now();
    const auto losses = predict_losses(trained.model, eval_set);
    report.predicted_total_ndpm = total_expected_loss(losses);
    report.ndpm_timings.predict_s = seconds_since(t_pred);
  }

  // DPM: fresh accountant per run; the actual-loss total query comes off the
  // top of the budget and the remainder follows the stage plan.
  {
    PrivacyAccountant accountant(config.budget);
    const PrivacyParams train_allowance{
        config.budget.epsilon - config.actual_total_epsilon,
        config.budget.delta};
    if (!(train_allowance.epsilon > 0.0))
      throw InvalidConfig(
          "budget epsilon must exceed actual_total_epsilon in the DPM variant");

    CreditRiskConfig cfg = config.dpm;
    cfg.mode = TrainMode::Private;
    cfg.seed = config.seed ^ static_cast<std::uint64_t>(run_id);
    cfg.budgets = budgets_from_plan(train_allowance, config.plan);
    TrainedCreditRisk trained = train_credit_risk(sample, cfg, &accountant);
    report.dpm_timings.preprocess_s = trained.preprocess_seconds;
    report.dpm_timings.train_s = trained.train_seconds;

    const auto t_pred = Clock::now();
    const auto losses = predict_losses(trained.model, eval_set);
    report.predicted_total_dpm = total_expected_loss(losses);
    report.dpm_timings.predict_s = seconds_since(t_pred);

    accountant.consume("query/actual_loss_total",
                       {config.actual_total_epsilon, 0.0});
    Rng rng = Rng::derived(config.seed,
                           kActualTotalTag + static_cast<std::uint64_t>(run_id));
    const double noisy = dp_sum(losses_dollars, config.loss_bounds,
                                config.actual_total_epsilon, rng);
    report.dp_actual_total = cents_from_dollars(noisy);
  }

  report.rel_diff_ndpm =
      relative_difference(report.actual_total, report.predicted_total_ndpm);
  report.rel_diff_dpm =
      relative_difference(report.dp_actual_total, report.predicted_total_dpm);
  return report;
}

}  // namespace

double relative_difference(Cents actual, Cents predicted) {
  if (predicted <= 0)
    throw DivisionByZero("relative_difference requires predicted > 0");
  return 100.0 * static_cast<double>(actual - predicted) /
         static_cast<double>(predicted);
}

std::vector<RunReport> run_experiment(const Dataset& dataset,
                                      const ExperimentConfig& config) {
  if (config.n_runs < 1) throw InvalidConfig("n_runs must be at least 1");
  if (dataset.empty()) throw EmptyInput("experiment dataset is empty");

  Dataset train_base = dataset;
  Dataset holdout_eval;
  const Dataset* holdout_ptr = nullptr;
  if (config.holdout) {
    auto [train, test] = split(dataset, config.holdout_split);
    train_base = std::move(train);
    holdout_eval = std::move(test);
    holdout_ptr = &holdout_eval;
  }

  std::vector<RunReport> reports(static_cast<std::size_t>(config.n_runs));
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    for (int r = 1; r <= config.n_runs; ++r) {
      try {
        reports[static_cast<std::size_t>(r - 1)] =
            execute_run(r, train_base, holdout_ptr, config);
      } catch (...) {
        rethrow_tagged(r);
      }
    }
    return reports;
  }

  // Runs are independent (own accountant, own rng streams); report order
  // stays keyed by run_id.
  std::mutex next_mutex;
  int next_run = 1;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      int r;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (first_error || next_run > config.n_runs) return;
        r = next_run++;
      }
      try {
        RunReport report = execute_run(r, train_base, holdout_ptr, config);
        std::lock_guard<std::mutex> lock(next_mutex);
        reports[static_cast<std::size_t>(r - 1)] = std::move(report);
      } catch (...) {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (!first_error) {
          try {
            rethrow_tagged(r);
          } catch (...) {
            first_error = std::current_exception();
          }
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, config.n_runs); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return reports;
}

AggregateReport aggregate(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw EmptyInput("aggregate: no run reports");
  AggregateReport agg;
  agg.runs = static_cast<int>(reports.size());
  const double n = static_cast<double>(reports.size());
  Cents actual = 0, dp_actual = 0, pred_ndpm = 0, pred_dpm = 0;
  double rd_ndpm = 0.0, rd_dpm = 0.0;
  for (const auto& r : reports) {
    actual += r.actual_total;
    dp_actual += r.dp_actual_total;
    pred_ndpm += r.predicted_total_ndpm;
    pred_dpm += r.predicted_total_dpm;
    rd_ndpm += r.rel_diff_ndpm;
    rd_dpm += r.rel_diff_dpm;
  }
  agg.ndpm.avg_actual_dollars = dollars(actual) / n;
  agg.ndpm.avg_predicted_dollars = dollars(pred_ndpm) / n;
  agg.ndpm.avg_rel_diff = rd_ndpm / n;
  agg.dpm.avg_actual_dollars = dollars(dp_actual) / n;
  agg.dpm.avg_predicted_dollars = dollars(pred_dpm) / n;
  agg.dpm.avg_rel_diff = rd_dpm / n;
  return agg;
}

void write_runs_csv(const std::vector<RunReport>& reports,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << "run,actual_total_exact,actual_total_dp,predicted_total_ndpm,"
         "predicted_total_dpm,rel_diff_ndpm,rel_diff_dpm\n";
  for (const auto& r : reports) {
    out << r.run_id << ',' << format_whole_dollars(r.actual_total) << ','
        << format_whole_dollars(r.dp_actual_total) << ','
        << format_whole_dollars(r.predicted_total_ndpm) << ','
        << format_whole_dollars(r.predicted_total_dpm) << ','
        << format_truncated(r.rel_diff_ndpm, 3) << ','
        << format_truncated(r.rel_diff_dpm, 3) << '\n';
  }
  write_file_atomic(path, out.str());
}

nlohmann::json aggregate_to_json(const AggregateReport& report) {
  const auto side = [](const AggregateSide& s) {
    return nlohmann::json{
        {"avg_actual_loss_dollars", std::llround(s.avg_actual_dollars)},
        {"avg_predicted_loss_dollars", std::llround(s.avg_predicted_dollars)},
        {"avg_relative_difference_pct",
         std::trunc(s.avg_rel_diff * 100.0) / 100.0}};
  };
  return nlohmann::json{
      {"runs", report.runs}, {"ndpm", side(report.ndpm)}, {"dpm", side(report.dpm)}};
}

nlohmann::json reports_to_json(const std::vector<RunReport>& reports) {
  const auto stage = [](const StageTimings& t) {
    return nlohmann::json{{"preprocess_s", t.preprocess_s},
                          {"train_s", t.train_s},
                          {"predict_s", t.predict_s}};
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"run_id", r.run_id},
                   {"actual_total_cents", r.actual_total},
                   {"dp_actual_total_cents", r.dp_actual_total},
                   {"predicted_total_ndpm_cents", r.predicted_total_ndpm},
                   {"predicted_total_dpm_cents", r.predicted_total_dpm},
                   {"rel_diff_ndpm", r.rel_diff_ndpm},
                   {"rel_diff_dpm", r.rel_diff_dpm},
                   {"ndpm_timings", stage(r.ndpm_timings)},
                   {"dpm_timings", stage(r.dpm_timings)}});
  }
  return arr;
}

void emit_figure_data(const std::vector<RunReport>& reports,
                      const std::filesystem::path& directory) {
  if (reports.empty()) throw EmptyInput("emit_figure_data: no run reports");
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);

  std::ostringstream actual, predicted, variance;
  actual << "run,ndpm,dpm\n";
  predicted << "run,ndpm,dpm\n";
  variance << "run,ndpm,dpm\n";
  for (const auto& r : reports) {
    actual << r.run_id << ',' << format_currency(r.actual_total) << ','
           << format_currency(r.dp_actual_total) << '\n';
    predicted << r.run_id << ',' << format_currency(r.predicted_total_ndpm)
              << ',' << format_currency(r.predicted_total_dpm) << '\n';
    variance << r.run_id << ',' << format_double_shortest(r.rel_diff_ndpm)
             << ',' << format_double_shortest(r.rel_diff_dpm) << '\n';
  }
  write_file_atomic(directory / "figure_actual_loss.csv", actual.str());
  write_file_atomic(directory / "figure_predicted_loss.csv", predicted.str());
  write_file_atomic(directory / "figure_relative_difference.csv",
                    variance.str());
}

std::vector<RunReport> read_replay_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("replay file is empty");
  const std::vector<std::string> header = split_csv_line(line);

  const std::vector<std::string> required = {
      "run", "actual_total_exact", "actual_total_dp", "predicted_total_ndpm",
      "predicted_total_dpm"};
  std::vector<std::size_t> index;
  for (const auto& name : required) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        index.push_back(i);
        found = true;
        break;
      }
    }
    if (!found) throw SchemaMismatch("replay file missing column '" + name + "'");
  }

  std::vector<RunReport> reports;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw ParseError("replay row " + std::to_string(row) + ": too few fields");
    RunReport r;
    r.run_id = static_cast<int>(std::stol(fields[index[0]]));
    const auto currency_at = [&](std::size_t k) -> Cents {
      const auto v = parse_currency(fields[index[k]]);
      if (!v)
        throw ParseError("replay row " + std::to_string(row) +
                         ": bad currency value '" + fields[index[k]] + "'");
      return *v;
    };
    r.actual_total = currency_at(1);
    r.dp_actual_total = currency_at(2);
    r.predicted_total_ndpm = currency_at(3);
    r.predicted_total_dpm = currency_at(4);
    r.rel_diff_ndpm = relative_difference(r.actual_total, r.predicted_total_ndpm);
    r.rel_diff_dpm = relative_difference(r.dp_actual_total, r.predicted_total_dpm);
    reports.push_back(r);
    ++row;
  }
  if (reports.empty()) throw EmptyInput("replay file has no data rows");
  return reports;
}

TimingSummary timing_summary(const std::vector<RunReport>& reports) {
  TimingSummary s;
  if (reports.empty()) return s;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    s.ndpm_mean.preprocess_s += r.ndpm_timings.preprocess_s / n;
    s.ndpm_mean.train_s += r.ndpm_timings.train_s / n;
    s.ndpm_mean.predict_s += r.ndpm_timings.predict_s / n;
    s.dpm_mean.preprocess_s += r.dpm_timings.preprocess_s / n;
    s.dpm_mean.train_s += r.dpm_timings.train_s / n;
    s.dpm_mean.predict_s += r.dpm_timings.predict_s / n;
  }
  const auto ratio = [](double dpm, double ndpm) {
    return ndpm > 0.0 ? dpm / ndpm : std::numeric_limits<double>::quiet_NaN();
  };
  s.preprocess_ratio = ratio(s.dpm_mean.preprocess_s, s.ndpm_mean.preprocess_s);
  s.train_ratio = ratio(s.dpm_mean.train_s, s.ndpm_mean.train_s);
  s.predict_ratio = ratio(s.dpm_mean.predict_s, s.ndpm_mean.predict_s);
  return s;
}

nlohmann::json timing_summary_to_json(const TimingSummary& s) {
  const auto stage = [](const StageTimings& t) {
    return nlohmann::json{{"preprocess_s", t.preprocess_s},
                          {"train_s", t.train_s},
                          {"predict_s", t.predict_s}};
  };
  const auto ratio_or_null = [](double r) -> nlohmann::json {
    if (std::isnan(r)) return nullptr;
    return r;
  };
  return nlohmann::json{{"ndpm_mean", stage(s.ndpm_mean)},
                        {"dpm_mean", stage(s.dpm_mean)},
                        {"dpm_over_ndpm",
                         {{"preprocess", ratio_or_null(s.preprocess_ratio)},
                          {"train", ratio_or_null(s.train_ratio)},
                          {"predict", ratio_or_null(s.predict_ratio)}}}};
}

std::string timing_summary_text(const TimingSummary& s) {
  std::ostringstream out;
  const auto ratio_str = [](double r) {
    if (std::isnan(r)) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fx", r);
    return std::string(buf);
  };
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "timing (mean per run)   NDPM        DPM         DPM/NDPM\n"
                "  preprocess            %-10.3fs %-10.3fs %s\n"
                "  train                 %-10.3fs %-10.3fs %s\n"
                "  predict               %-10.3fs %-10.3fs %s\n",
                s.ndpm_mean.preprocess_s, s.dpm_mean.preprocess_s,
                ratio_str(s.preprocess_ratio).c_str(), s.ndpm_mean.train_s,
                s.dpm_mean.train_s, ratio_str(s.train_ratio).c_str(),
                s.ndpm_mean.predict_s, s.dpm_mean.predict_s,
                ratio_str(s.predict_ratio).c_str());
  out << buf;
  out << "  reference point: for like-for-like model sizes the prediction-time "
         "ratio is expected to sit near 1x\n";
  return out.str();
}

}  // namespace dpcm
