#include "dpcm/preprocess/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpcm/credit/formulas.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/privacy/mechanisms.hpp"

namespace dpcm {

namespace {

bool is_missing(double v) { return std::isnan(v); }

const std::map<std::string, std::string>& census_region_table() {
  static const std::map<std::string, std::string> table = {
      // Northeast
      {"CT", "Northeast"}, {"ME", "Northeast"}, {"MA", "Northeast"},
      {"NH", "Northeast"}, {"RI", "Northeast"}, {"VT", "Northeast"},
      {"NJ", "Northeast"}, {"NY", "Northeast"}, {"PA", "Northeast"},
      // Midwest
      {"IL", "Midwest"}, {"IN", "Midwest"}, {"MI", "Midwest"},
      {"OH", "Midwest"}, {"WI", "Midwest"}, {"IA", "Midwest"},
      {"KS", "Midwest"}, {"MN", "Midwest"}, {"MO", "Midwest"},
      {"NE", "Midwest"}, {"ND", "Midwest"}, {"SD", "Midwest"},
      // South
      {"DE", "South"}, {"FL", "South"}, {"GA", "South"}, {"MD", "South"},
      {"NC", "South"}, {"SC", "South"}, {"VA", "South"}, {"DC", "South"},
      {"WV", "South"}, {"AL", "South"}, {"KY", "South"}, {"MS", "South"},
      {"TN", "South"}, {"AR", "South"}, {"LA", "South"}, {"OK", "South"},
      {"TX", "South"},
      // West
      {"AZ", "West"}, {"CO", "West"}, {"ID", "West"}, {"MT", "West"},
      {"NV", "West"}, {"NM", "West"}, {"UT", "West"}, {"WY", "West"},
      {"AK", "West"}, {"CA", "West"}, {"HI", "West"}, {"OR", "West"},
      {"WA", "West"}};
  return table;
}

double exact_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct PairMoments {
  double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0, cov = 0;
  std::size_t n = 0;
};

// Pearson correlation from raw or noisy moments; 0 when degenerate.
double correlation_from(const PairMoments& m) {
  if (m.n < 2) return 0.0;
  const double vx = std::max(m.var_x, 0.0);
  const double vy = std::max(m.var_y, 0.0);
  if (vx < 1e-12 || vy < 1e-12) return 0.0;
  return std::clamp(m.cov / std::sqrt(vx * vy), -1.0, 1.0);
}

}  // namespace

// --- SchemaBounds -----------------------------------------------------------

SchemaBounds SchemaBounds::defaults() {
  SchemaBounds b;
  b.by_column = {
      {"loan_amount", {0.0, 45000.0}},
      {"total_funded_amount", {0.0, 40000.0}},
      {"term_months", {36.0, 60.0}},
      {"interest_rate", {0.0, 31.0}},
      {"annual_income", {0.0, 500000.0}},
      {"dti", {0.0, 60.0}},
  };
  return b;
}

const ClippingBounds& SchemaBounds::at(const std::string& column) const {
  const auto it = by_column.find(column);
  if (it == by_column.end())
    throw UnknownColumn("no schema bounds declared for column '" + column + "'");
  return it->second;
}

// --- ColumnTable ------------------------------------------------------------

const NumericColumn* ColumnTable::find_numeric(const std::string& name) const {
  for (const auto& c : numeric)
    if (c.name == name) return &c;
  return nullptr;
}

const CategoricalColumn* ColumnTable::find_categorical(
    const std::string& name) const {
  for (const auto& c : categorical)
    if (c.name == name) return &c;
  return nullptr;
}

ColumnTable table_from_dataset(const Dataset& dataset) {
  const std::size_t n = dataset.size();
  ColumnTable t;
  t.rows = n;
  t.numeric = {{"loan_amount", {}},   {"total_funded_amount", {}},
               {"term_months", {}},   {"interest_rate", {}},
               {"annual_income", {}}, {"dti", {}}};
  t.categorical = {{"member_id", {}}, {"state", {}}, {"zip_code", {}},
                   {"home_ownership", {}}, {"purpose", {}}};
  for (auto& c : t.numeric) c.values.reserve(n);
  for (auto& c : t.categorical) c.values.reserve(n);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : dataset.records) {
    t.numeric[0].values.push_back(dollars(r.loan_amount));
    t.numeric[1].values.push_back(dollars(r.total_funded_amount));
    t.numeric[2].values.push_back(static_cast<double>(r.term_months));
    t.numeric[3].values.push_back(r.interest_rate);
    t.numeric[4].values.push_back(r.annual_income ? dollars(*r.annual_income)
                                                  : kNaN);
    t.numeric[5].values.push_back(r.dti ? *r.dti : kNaN);
    t.categorical[0].values.push_back(r.member_id);
    t.categorical[1].values.push_back(r.state);
    t.categorical[2].values.push_back(r.zip_code);
    t.categorical[3].values.push_back(to_string(r.home_ownership));
    t.categorical[4].values.push_back(to_string(r.purpose));
  }
  return t;
}

// --- Step fitting -----------------------------------------------------------

TransformStep fit_binning(const std::string& column) {
  BinStep step;
  step.column = column;
  if (column == "state") {
    step.table = census_region_table();
    step.fallback = "OTHER";
    step.vocabulary = {"Northeast", "Midwest", "South", "West", "OTHER"};
  } else if (column == "home_ownership") {
    step.table = {{"RENT", "RENT"},   {"OWN", "OWN"}, {"MORTGAGE", "MORTGAGE"},
                  {"OTHER", "OTHER"}, {"NONE", "OTHER"}, {"ANY", "OTHER"}};
    step.fallback = "OTHER";
    step.vocabulary = {"RENT", "OWN", "MORTGAGE", "OTHER"};
  } else if (column == "purpose") {
    step.table = {{"debt_consolidation", "debt"},
                  {"credit_card", "credit_card"},
                  {"home_improvement", "home"},
                  {"house", "home"},
                  {"major_purchase", "major_purchase"}};
    step.fallback = "other";
    step.vocabulary = {"debt", "credit_card", "home", "major_purchase", "other"};
  } else {
    throw UnknownColumn("no binning table for column '" + column + "'");
  }
  return {StepKind::BinCategorical, std::move(step)};
}

TransformStep fit_drop_columns(std::vector<std::string> names) {
  return {StepKind::DropColumns, DropStep{std::move(names)}};
}

TransformStep fit_median_impute(const ColumnTable& table,
                                const std::vector<std::string>& columns,
                                const SchemaBounds& bounds, FitMode mode,
                                double epsilon_total,
                                PrivacyAccountant* accountant, Rng* rng) {
  if (columns.empty()) return {StepKind::MedianImpute, ImputeStep{}};
  if (mode == FitMode::Private) {
    if (accountant == nullptr || rng == nullptr)
      throw InvalidConfig("private fit requires an accountant and rng");
    if (!(epsilon_total > 0.0))
      throw InvalidParams("private fit requires positive epsilon");
    accountant->consume("preprocess/median_impute", {epsilon_total, 0.0});
  }

  ImputeStep step;
  const double eps_each = epsilon_total / static_cast<double>(columns.size());
  for (const auto& name : columns) {
    const NumericColumn* col = table.find_numeric(name);
    if (col == nullptr)
      throw UnknownColumn("median_impute: unknown numeric column '" + name + "'");
    std::vector<double> present;
    present.reserve(col->values.size());
    for (double v : col->values)
      if (!is_missing(v)) present.push_back(v);
    if (present.empty())
      throw EmptyInput("median_impute: column '" + name + "' has no values");
    double value;
    if (mode == FitMode::Exact) {
      value = exact_median(std::move(present));
    } else {
      value = dp_median(present, bounds.at(name), eps_each, *rng);
    }
    step.values.emplace_back(name, value);
  }
  return {StepKind::MedianImpute, std::move(step)};
}

TransformStep fit_correlation_filter(const ColumnTable& table, double threshold,
                                     const SchemaBounds& bounds, FitMode mode,
                                     double epsilon_total,
                                     PrivacyAccountant* accountant, Rng* rng) {
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw InvalidParams("correlation threshold must lie in (0, 1)");
  if (table.numeric.size() < 2)
    throw InvalidParams("correlation filter needs at least 2 numeric columns");

  const std::size_t d = table.numeric.size();
  const std::size_t num_pairs = d * (d - 1) / 2;
  if (mode == FitMode::Private) {
    if (accountant == nullptr || rng == nullptr)
      throw InvalidConfig("private fit requires an accountant and rng");
    if (!(epsilon_total > 0.0))
      throw InvalidParams("private fit requires positive epsilon");
    accountant->consume("preprocess/correlation_filter", {epsilon_total, 0.0});
  }
  const double eps_sum =
      mode == FitMode::Private
          ? epsilon_total / static_cast<double>(num_pairs) / 5.0
          : 0.0;

  std::vector<bool> dropped(d, false);
  const ClippingBounds unit{0.0, 1.0};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const auto& x = table.numeric[i].values;
      const auto& y = table.numeric[j].values;
      PairMoments m;
      if (mode == FitMode::Exact) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
          if (is_missing(x[k]) || is_missing(y[k])) continue;
          sx += x[k];
          sy += y[k];
          sxx += x[k] * x[k];
          syy += y[k] * y[k];
          sxy += x[k] * y[k];
          ++m.n;
        }
        if (m.n >= 2) {
          const double n = static_cast<double>(m.n);
          m.mean_x = sx / n;
          m.mean_y = sy / n;
          m.var_x = sxx / n - m.mean_x * m.mean_x;
          m.var_y = syy / n - m.mean_y * m.mean_y;
          m.cov = sxy / n - m.mean_x * m.mean_y;
        }
      } else {
        // Bounds-normalize both columns to [0, 1]; Pearson r is invariant
        // under the affine map and every moment query then has sensitivity 1.
        // The complete-pair count is structural metadata, not spend.
        const ClippingBounds& bx = bounds.at(table.numeric[i].name);
        const ClippingBounds& by = bounds.at(table.numeric[j].name);
        std::vector<double> u, v, uu, vv, uv;
        for (std::size_t k = 0; k < x.size(); ++k) {
          if (is_missing(x[k]) || is_missing(y[k])) continue;
          const double a = (bx.clip(x[k]) - bx.lower) / bx.width();
          const double b = (by.clip(y[k]) - by.lower) / by.width();
          u.push_back(a);
          v.push_back(b);
          uu.push_back(a * a);
          vv.push_back(b * b);
          uv.push_back(a * b);
        }
        m.n = u.size();
        if (m.n >= 2) {
          const double n = static_cast<double>(m.n);
          const double su = dp_sum(u, unit, eps_sum, *rng);
          const double sv = dp_sum(v, unit, eps_sum, *rng);
          const double suu = dp_sum(uu, unit, eps_sum, *rng);
          const double svv = dp_sum(vv, unit, eps_sum, *rng);
          const double suv = dp_sum(uv, unit, eps_sum, *rng);
          m.mean_x = su / n;
          m.mean_y = sv / n;
          m.var_x = suu / n - m.mean_x * m.mean_x;
          m.var_y = svv / n - m.mean_y * m.mean_y;
          m.cov = suv / n - m.mean_x * m.mean_y;
        }
      }
      if (std::abs(correlation_from(m)) > threshold) dropped[j] = true;
    }
  }

  CorrelationStep step;
  step.threshold = threshold;
  for (std::size_t j = 0; j < d; ++j)
    if (dropped[j]) step.dropped.push_back(table.numeric[j].name);
  return {StepKind::CorrelationFilter, std::move(step)};
}

TransformStep fit_one_hot(std::vector<OneHotStep::ColumnVocab> columns) {
  return {StepKind::OneHot, OneHotStep{std::move(columns)}};
}

// --- Step application -------------------------------------------------------

namespace {

void apply_drop(const DropStep& step, ColumnTable& table) {
  for (const auto& name : step.names) {
    std::erase_if(table.numeric,
                  [&](const NumericColumn& c) { return c.name == name; });
    std::erase_if(table.categorical,
                  [&](const CategoricalColumn& c) { return c.name == name; });
  }
}

void apply_bin(const BinStep& step, ColumnTable& table) {
  for (auto& c : table.categorical) {
    if (c.name != step.column) continue;
    for (auto& v : c.values) v = step.map(v);
    return;
  }
  throw UnknownColumn("bin step: column '" + step.column + "' not present");
}

void apply_impute(const ImputeStep& step, ColumnTable& table) {
  for (const auto& [name, value] : step.values) {
    bool found = false;
    for (auto& c : table.numeric) {
      if (c.name != name) continue;
      for (double& v : c.values)
        if (is_missing(v)) v = value;
      found = true;
      break;
    }
    if (!found)
      throw UnknownColumn("impute step: column '" + name + "' not present");
  }
}

void apply_correlation(const CorrelationStep& step, ColumnTable& table) {
  for (const auto& name : step.dropped)
    std::erase_if(table.numeric,
                  [&](const NumericColumn& c) { return c.name == name; });
}

void apply_one_hot(const OneHotStep& step, ColumnTable& table) {
  for (const auto& cv : step.columns) {
    const CategoricalColumn* src = table.find_categorical(cv.column);
    if (src == nullptr)
      throw UnknownColumn("one_hot step: column '" + cv.column + "' not present");
    for (const auto& label : cv.vocabulary) {
      NumericColumn out;
      out.name = cv.column + "=" + label;
      out.values.reserve(table.rows);
      for (const auto& v : src->values)
        out.values.push_back(v == label ? 1.0 : 0.0);
      table.numeric.push_back(std::move(out));
    }
    std::erase_if(table.categorical, [&](const CategoricalColumn& c) {
      return c.name == cv.column;
    });
  }
  if (!table.categorical.empty())
    throw UnknownColumn("column '" + table.categorical.front().name +
                        "' has no fixed vocabulary; drop it or bin it");
}

void apply_step(const TransformStep& step, ColumnTable& table) {
  switch (step.kind) {
    case StepKind::DropColumns:
      apply_drop(std::get<DropStep>(step.params), table);
      break;
    case StepKind::BinCategorical:
      apply_bin(std::get<BinStep>(step.params), table);
      break;
    case StepKind::MedianImpute:
      apply_impute(std::get<ImputeStep>(step.params), table);
      break;
    case StepKind::CorrelationFilter:
      apply_correlation(std::get<CorrelationStep>(step.params), table);
      break;
    case StepKind::OneHot:
      apply_one_hot(std::get<OneHotStep>(step.params), table);
      break;
  }
}

}  // namespace

// --- Pipeline ---------------------------------------------------------------

void Pipeline::fit(const Dataset& dataset, PrivacyAccountant* accountant,
                   std::uint64_t seed) {
  steps_.clear();
  warnings_.clear();
  fitted_ = false;

  ColumnTable table = table_from_dataset(dataset);
  Rng rng(seed);
  Rng* rng_ptr = config_.mode == FitMode::Private ? &rng : nullptr;

  // Drop first so later statistics never touch discarded columns.
  std::vector<std::string> to_drop;
  for (const auto& name : config_.drop_columns) {
    if (table.find_numeric(name) == nullptr &&
        table.find_categorical(name) == nullptr) {
      warnings_.push_back("drop_columns: '" + name + "' not in schema; ignored");
      continue;
    }
    to_drop.push_back(name);
  }
  TransformStep drop = fit_drop_columns(to_drop);
  apply_step(drop, table);
  steps_.push_back(std::move(drop));

  std::map<std::string, std::vector<std::string>> vocab_by_column;
  for (const auto& name : config_.bin_columns) {
    if (table.find_categorical(name) == nullptr) {
      warnings_.push_back("bin_columns: '" + name + "' not present; ignored");
      continue;
    }
    TransformStep bin = fit_binning(name);
    vocab_by_column[name] = std::get<BinStep>(bin.params).vocabulary;
    apply_step(bin, table);
    steps_.push_back(std::move(bin));
  }

  std::vector<std::string> impute_columns = config_.impute_columns;
  if (impute_columns.empty())
    for (const auto& c : table.numeric) impute_columns.push_back(c.name);

  const bool do_impute = !impute_columns.empty();
  const bool do_corr = config_.correlation_filter && table.numeric.size() >= 2;
  double eps_impute = 0.0, eps_corr = 0.0;
  if (config_.mode == FitMode::Private) {
    if (do_impute && do_corr) {
      eps_impute = config_.epsilon / 2.0;
      eps_corr = config_.epsilon / 2.0;
    } else if (do_impute) {
      eps_impute = config_.epsilon;
    } else if (do_corr) {
      eps_corr = config_.epsilon;
    }
  }

  if (do_impute) {
    TransformStep impute =
        fit_median_impute(table, impute_columns, config_.bounds, config_.mode,
                          eps_impute, accountant, rng_ptr);
    apply_step(impute, table);
    steps_.push_back(std::move(impute));
  }

  if (do_corr) {
    TransformStep corr = fit_correlation_filter(
        table, config_.correlation_threshold, config_.bounds, config_.mode,
        eps_corr, accountant, rng_ptr);
    apply_step(corr, table);
    steps_.push_back(std::move(corr));
  }

  std::vector<OneHotStep::ColumnVocab> vocabs;
  for (const auto& c : table.categorical) {
    const auto it = vocab_by_column.find(c.name);
    if (it == vocab_by_column.end())
      throw UnknownColumn("column '" + c.name +
                          "' has no fixed vocabulary; drop it or bin it");
    vocabs.push_back({c.name, it->second});
  }
  TransformStep one_hot = fit_one_hot(std::move(vocabs));
  apply_step(one_hot, table);
  steps_.push_back(std::move(one_hot));

  fitted_ = true;
}

FeatureMatrix Pipeline::apply(const Dataset& dataset) const {
  if (!fitted_) throw NotFitted("pipeline has not been fitted");

  ColumnTable table = table_from_dataset(dataset);
  for (const auto& step : steps_) apply_step(step, table);

  FeatureMatrix m;
  const std::size_t n = table.rows;
  const std::size_t d = table.numeric.size();
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  m.column_names.reserve(d);
  m.column_bounds.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& col = table.numeric[j];
    m.column_names.push_back(col.name);
    if (config_.bounds.has(col.name)) {
      m.column_bounds.push_back(config_.bounds.at(col.name));
    } else if (col.name.find('=') != std::string::npos) {
      m.column_bounds.push_back({0.0, 1.0});  // one-hot indicator
    } else {
      throw UnknownColumn("no schema bounds for feature column '" + col.name +
                          "'");
    }
    for (std::size_t i = 0; i < n; ++i)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          col.values[i];
  }

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  m.default_label.resize(static_cast<Eigen::Index>(n));
  m.ccf_target.resize(static_cast<Eigen::Index>(n));
  m.recovery_rate_target.resize(static_cast<Eigen::Index>(n));
  m.member_ids.reserve(n);
  m.funded_cents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LoanRecord& r = dataset.records[i];
    m.member_ids.push_back(r.member_id);
    m.funded_cents.push_back(r.total_funded_amount);
    const auto idx = static_cast<Eigen::Index>(i);
    if (is_defaulted(r)) {
      m.default_label(idx) = 1.0;
      const Cents ead = r.total_funded_amount - r.total_recovered_principal;
      m.ccf_target(idx) = ccf(r.total_funded_amount, r.total_recovered_principal);
      m.recovery_rate_target(idx) = recovery_rate(r.recoveries, ead);
    } else {
      m.default_label(idx) = 0.0;
      m.ccf_target(idx) = kNaN;
      m.recovery_rate_target(idx) = kNaN;
    }
  }
  return m;
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::json step_to_json(const TransformStep& step) {
  nlohmann::json j;
  switch (step.kind) {
    case StepKind::DropColumns: {
      const auto& s = std::get<DropStep>(step.params);
      j["kind"] = "drop_columns";
      j["names"] = s.names;
      break;
    }
    case StepKind::BinCategorical: {
      const auto& s = std::get<BinStep>(step.params);
      j["kind"] = "bin_categorical";
      j["column"] = s.column;
      j["fallback"] = s.fallback;
      j["vocabulary"] = s.vocabulary;
      j["table"] = s.table;
      break;
    }
    case StepKind::MedianImpute: {
      const auto& s = std::get<ImputeStep>(step.params);
      j["kind"] = "median_impute";
      nlohmann::json values;
      for (const auto& [name, value] : s.values) values[name] = value;
      j["values"] = std::move(values);
      break;
    }
    case StepKind::CorrelationFilter: {
      const auto& s = std::get<CorrelationStep>(step.params);
      j["kind"] = "correlation_filter";
      j["threshold"] = s.threshold;
      j["dropped"] = s.dropped;
      break;
    }
    case StepKind::OneHot: {
      const auto& s = std::get<OneHotStep>(step.params);
      j["kind"] = "one_hot";
      nlohmann::json cols = nlohmann::json::array();
      for (const auto& cv : s.columns)
        cols.push_back({{"column", cv.column}, {"vocabulary", cv.vocabulary}});
      j["columns"] = std::move(cols);
      break;
    }
  }
  return j;
}

TransformStep step_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "drop_columns") {
    return {StepKind::DropColumns,
            DropStep{j.at("names").get<std::vector<std::string>>()}};
  }
  if (kind == "bin_categorical") {
    BinStep s;
    s.column = j.at("column").get<std::string>();
    s.fallback = j.at("fallback").get<std::string>();
    s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    s.table = j.at("table").get<std::map<std::string, std::string>>();
    return {StepKind::BinCategorical, std::move(s)};
  }
  if (kind == "median_impute") {
    ImputeStep s;
    for (const auto& [name, value] : j.at("values").items())
      s.values.emplace_back(name, value.get<double>());
    return {StepKind::MedianImpute, std::move(s)};
  }
  if (kind == "correlation_filter") {
    CorrelationStep s;
    s.threshold = j.at("threshold").get<double>();
    s.dropped = j.at("dropped").get<std::vector<std::string>>();
    return {StepKind::CorrelationFilter, std::move(s)};
  }
  if (kind == "one_hot") {
    OneHotStep s;
    for (const auto& c : j.at("columns"))
      s.columns.push_back({c.at("column").get<std::string>(),
                           c.at("vocabulary").get<std::vector<std::string>>()});
    return {StepKind::OneHot, std::move(s)};
  }
  throw MalformedDocument("unknown pipeline step kind '" + kind + "'");
}

}  // namespace

nlohmann::json Pipeline::to_json() const {
  if (!fitted_) throw NotFitted("cannot serialize an unfitted pipeline");
  nlohmann::json j;
  j["mode"] = config_.mode == FitMode::Private ? "private" : "exact";
  nlohmann::json bounds;
  for (const auto& [name, b] : config_.bounds.by_column)
    bounds[name] = {b.lower, b.upper};
  j["bounds"] = std::move(bounds);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : steps_) steps.push_back(step_to_json(s));
  j["steps"] = std::move(steps);
  return j;
}

Pipeline Pipeline::from_json(const nlohmann::json& doc) {
  PipelineConfig config;
  const std::string mode = doc.at("mode").get<std::string>();
  if (mode == "private")
    config.mode = FitMode::Private;
  else if (mode == "exact")
    config.mode = FitMode::Exact;
  else
    throw MalformedDocument("pipeline mode must be 'exact' or 'private'");
  config.bounds.by_column.clear();
  for (const auto& [name, b] : doc.at("bounds").items()) {
    if (!b.is_array() || b.size() != 2)
      throw MalformedDocument("pipeline bounds for '" + name +
                              "' must be [lower, upper]");
    config.bounds.by_column[name] = {b[0].get<double>(), b[1].get<double>()};
  }
  Pipeline p(std::move(config));
  for (const auto& s : doc.at("steps")) p.steps_.push_back(step_from_json(s));
  p.fitted_ = true;
  return p;
}

}  // namespace dpcm
