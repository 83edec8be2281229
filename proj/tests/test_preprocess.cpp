#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "dpcm/data/synthetic.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/preprocess/pipeline.hpp"

using namespace dpcm;

namespace {

Dataset small_dataset(std::size_t n = 400, std::uint64_t seed = 7,
                      double missing_rate = 0.1) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.missing_rate = missing_rate;
  return generate_synthetic(cfg);
}

ColumnTable toy_table() {
  ColumnTable t;
  t.rows = 4;
  t.numeric = {{"a", {1.0, 2.0, 3.0, 4.0}},
               {"b", {2.0, 4.0, 6.0, 8.0}},   // duplicate of a up to scale
               {"c", {5.0, -1.0, 2.0, 0.5}}};
  return t;
}

SchemaBounds toy_bounds() {
  SchemaBounds b;
  b.by_column = {{"a", {0.0, 10.0}}, {"b", {0.0, 10.0}}, {"c", {-2.0, 6.0}}};
  return b;
}

}  // namespace

TEST_CASE("binning: census regions, ownership catch-all, purpose folding") {
  const auto state = std::get<BinStep>(fit_binning("state").params);
  CHECK(state.map("CA") == "West");
  CHECK(state.map("NY") == "Northeast");
  CHECK(state.map("TX") == "South");
  CHECK(state.map("OH") == "Midwest");
  CHECK(state.map("PR") == "OTHER");
  CHECK(state.vocabulary.size() == 5);

  const auto home = std::get<BinStep>(fit_binning("home_ownership").params);
  CHECK(home.map("NONE") == "OTHER");
  CHECK(home.map("MORTGAGE") == "MORTGAGE");

  const auto purpose = std::get<BinStep>(fit_binning("purpose").params);
  CHECK(purpose.map("wedding") == "other");
  CHECK(purpose.map("debt_consolidation") == "debt");
  CHECK(purpose.map("house") == "home");

  CHECK_THROWS_AS(fit_binning("dti"), UnknownColumn);
}

TEST_CASE("median impute: exact per-column medians") {
  ColumnTable t;
  t.rows = 4;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.numeric = {{"x", {1.0, 2.0, nan, 3.0}}};
  SchemaBounds bounds;
  bounds.by_column = {{"x", {0.0, 10.0}}};
  const auto step = std::get<ImputeStep>(
      fit_median_impute(t, {"x"}, bounds, FitMode::Exact, 0.0, nullptr, nullptr)
          .params);
  REQUIRE(step.values.size() == 1);
  CHECK(step.values[0].second == 2.0);
}

TEST_CASE("median impute: private at huge epsilon recovers the median") {
  ColumnTable t;
  t.rows = 1002;
  std::vector<double> values;
  for (int i = 1; i <= 1001; ++i) values.push_back(i);
  values.push_back(std::numeric_limits<double>::quiet_NaN());
  t.numeric = {{"x", std::move(values)}};
  SchemaBounds bounds;
  bounds.by_column = {{"x", {0.0, 1002.0}}};
  PrivacyAccountant acc({1e10, 0.0});
  Rng rng(5);
  const auto step = std::get<ImputeStep>(
      fit_median_impute(t, {"x"}, bounds, FitMode::Private, 1e9, &acc, &rng)
          .params);
  CHECK(step.values[0].second == 501.0);
  CHECK(acc.ledger().size() == 1);
}

TEST_CASE("correlation filter: duplicated column dropped, later in order") {
  const ColumnTable t = toy_table();
  const auto step = std::get<CorrelationStep>(
      fit_correlation_filter(t, 0.85, toy_bounds(), FitMode::Exact, 0.0,
                             nullptr, nullptr)
          .params);
  REQUIRE(step.dropped.size() == 1);
  CHECK(step.dropped[0] == "b");
}

TEST_CASE("correlation filter: independent columns survive") {
  Rng rng(3);
  ColumnTable t;
  t.rows = 10000;
  t.numeric = {{"u", {}}, {"v", {}}};
  for (int i = 0; i < 10000; ++i) {
    t.numeric[0].values.push_back(rng.uniform(0.0, 1.0));
    t.numeric[1].values.push_back(rng.uniform(0.0, 1.0));
  }
  SchemaBounds bounds;
  bounds.by_column = {{"u", {0.0, 1.0}}, {"v", {0.0, 1.0}}};
  const auto step = std::get<CorrelationStep>(
      fit_correlation_filter(t, 0.85, bounds, FitMode::Exact, 0.0, nullptr,
                             nullptr)
          .params);
  CHECK(step.dropped.empty());
}

TEST_CASE("correlation filter: private at huge epsilon matches exact") {
  const ColumnTable t = toy_table();
  const auto exact = std::get<CorrelationStep>(
      fit_correlation_filter(t, 0.85, toy_bounds(), FitMode::Exact, 0.0,
                             nullptr, nullptr)
          .params);
  PrivacyAccountant acc({1e10, 0.0});
  Rng rng(11);
  const auto priv = std::get<CorrelationStep>(
      fit_correlation_filter(t, 0.85, toy_bounds(), FitMode::Private, 1e9,
                             &acc, &rng)
          .params);
  CHECK(priv.dropped == exact.dropped);
  CHECK(acc.spent().epsilon == doctest::Approx(1e9));
}

TEST_CASE("correlation filter: parameter validation") {
  const ColumnTable t = toy_table();
  CHECK_THROWS_AS(fit_correlation_filter(t, 1.5, toy_bounds(), FitMode::Exact,
                                         0.0, nullptr, nullptr),
                  InvalidParams);
  ColumnTable single;
  single.rows = 2;
  single.numeric = {{"a", {1.0, 2.0}}};
  CHECK_THROWS_AS(fit_correlation_filter(single, 0.85, toy_bounds(),
                                         FitMode::Exact, 0.0, nullptr, nullptr),
                  InvalidParams);
}

TEST_CASE("pipeline: fit and apply on the loan schema") {
  const Dataset ds = small_dataset();
  Pipeline p{PipelineConfig{}};
  p.fit(ds);
  REQUIRE(p.fitted());

  const FeatureMatrix m = p.apply(ds);
  CHECK(m.rows() == static_cast<Eigen::Index>(ds.size()));

  // Width: numeric survivors + one-hot blocks (5 + 4 + 5), minus any
  // correlation-filter drops among the five numeric features.
  std::size_t corr_dropped = 0;
  for (const auto& step : p.steps())
    if (step.kind == StepKind::CorrelationFilter)
      corr_dropped = std::get<CorrelationStep>(step.params).dropped.size();
  CHECK(m.cols() == static_cast<Eigen::Index>(5 - corr_dropped + 14));

  for (const auto& name : m.column_names) {
    CHECK(name != "loan_amount");
    CHECK(name != "zip_code");
    CHECK(name != "member_id");
  }
  CHECK(m.values.allFinite());
  REQUIRE(m.column_bounds.size() == static_cast<std::size_t>(m.cols()));

  // Targets: ccf/recovery defined exactly on defaulted records.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.default_label(i) == 1.0) {
      CHECK(std::isfinite(m.ccf_target(i)));
      CHECK(m.ccf_target(i) >= 0.0);
      CHECK(m.ccf_target(i) <= 1.0);
      CHECK(std::isfinite(m.recovery_rate_target(i)));
    } else {
      CHECK(std::isnan(m.ccf_target(i)));
      CHECK(std::isnan(m.recovery_rate_target(i)));
    }
  }
}

TEST_CASE("pipeline: one-hot block for home ownership is positional") {
  Dataset ds = small_dataset(50, 41);
  ds.records[0].home_ownership = HomeOwnership::Mortgage;
  Pipeline p{PipelineConfig{}};
  p.fit(ds);
  const FeatureMatrix m = p.apply(ds);
  int rent = -1, own = -1, mortgage = -1, other = -1;
  for (int j = 0; j < m.cols(); ++j) {
    if (m.column_names[j] == "home_ownership=RENT") rent = j;
    if (m.column_names[j] == "home_ownership=OWN") own = j;
    if (m.column_names[j] == "home_ownership=MORTGAGE") mortgage = j;
    if (m.column_names[j] == "home_ownership=OTHER") other = j;
  }
  REQUIRE(rent >= 0);
  REQUIRE(own == rent + 1);
  REQUIRE(mortgage == rent + 2);
  REQUIRE(other == rent + 3);
  CHECK(m.values(0, rent) == 0.0);
  CHECK(m.values(0, own) == 0.0);
  CHECK(m.values(0, mortgage) == 1.0);
  CHECK(m.values(0, other) == 0.0);
}

TEST_CASE("pipeline: applying twice is bit-identical; empty dataset works") {
  const Dataset ds = small_dataset(200, 3);
  Pipeline p{PipelineConfig{}};
  p.fit(ds);
  const FeatureMatrix a = p.apply(ds);
  const FeatureMatrix b = p.apply(ds);
  CHECK(a.values == b.values);

  Dataset empty;
  const FeatureMatrix e = p.apply(empty);
  CHECK(e.rows() == 0);
  CHECK(e.cols() == a.cols());
  CHECK(e.column_names == a.column_names);
}

TEST_CASE("pipeline: apply before fit throws NotFitted") {
  Pipeline p{PipelineConfig{}};
  CHECK_THROWS_AS(p.apply(small_dataset(50, 1)), NotFitted);
}

TEST_CASE("pipeline: private fit spends, apply never does") {
  const Dataset ds = small_dataset(300, 9);
  PipelineConfig cfg;
  cfg.mode = FitMode::Private;
  cfg.epsilon = 2.0;
  Pipeline p{cfg};
  PrivacyAccountant acc({8.0, 1e-5});
  p.fit(ds, &acc, 33);
  const PrivacyParams after_fit = acc.spent();
  CHECK(after_fit.epsilon == doctest::Approx(2.0));
  CHECK(acc.ledger().size() == 2);  // impute + correlation

  const FeatureMatrix m1 = p.apply(ds);
  const FeatureMatrix m2 = p.apply(ds);
  CHECK(acc.spent().epsilon == after_fit.epsilon);
  CHECK(acc.ledger().size() == 2);
  CHECK(m1.values == m2.values);
}

TEST_CASE("pipeline: epsilon to infinity matches exact fit") {
  const Dataset ds = small_dataset(500, 13, 0.15);

  // One granule per column: the gap between the two middle order statistics
  // (dp_median returns an order statistic; the even-count exact median is
  // their midpoint).
  std::map<std::string, double> granule;
  const ColumnTable table = table_from_dataset(ds);
  for (const auto& col : table.numeric) {
    std::vector<double> present;
    for (double v : col.values)
      if (!std::isnan(v)) present.push_back(v);
    std::sort(present.begin(), present.end());
    const std::size_t mid = present.size() / 2;
    granule[col.name] = present[mid] - present[mid - 1];
  }

  Pipeline exact{PipelineConfig{}};
  exact.fit(ds);

  PipelineConfig private_cfg;
  private_cfg.mode = FitMode::Private;
  private_cfg.epsilon = 1e9;
  Pipeline priv{private_cfg};
  PrivacyAccountant acc({1e10, 0.0});
  priv.fit(ds, &acc, 77);

  REQUIRE(exact.steps().size() == priv.steps().size());
  for (std::size_t s = 0; s < exact.steps().size(); ++s) {
    const auto& es = exact.steps()[s];
    const auto& ps = priv.steps()[s];
    REQUIRE(es.kind == ps.kind);
    if (es.kind == StepKind::MedianImpute) {
      const auto& ev = std::get<ImputeStep>(es.params).values;
      const auto& pv = std::get<ImputeStep>(ps.params).values;
      REQUIRE(ev.size() == pv.size());
      for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(ev[i].first == pv[i].first);
        CHECK(std::abs(ev[i].second - pv[i].second) <=
              granule.at(ev[i].first) + 1e-9);
      }
    }
    if (es.kind == StepKind::CorrelationFilter) {
      CHECK(std::get<CorrelationStep>(es.params).dropped ==
            std::get<CorrelationStep>(ps.params).dropped);
    }
  }
}

TEST_CASE("pipeline: no missing values after imputation over all numerics") {
  const Dataset ds = small_dataset(600, 19, 0.3);
  Pipeline p{PipelineConfig{}};
  p.fit(ds);
  const FeatureMatrix m = p.apply(ds);
  CHECK(m.values.allFinite());
}

TEST_CASE("pipeline: drop of an absent column warns and continues") {
  const Dataset ds = small_dataset(100, 23);
  PipelineConfig cfg;
  cfg.drop_columns = {"loan_amount", "zip_code", "member_id", "not_a_column"};
  Pipeline p{cfg};
  p.fit(ds);
  REQUIRE(p.fitted());
  bool warned = false;
  for (const auto& w : p.warnings())
    warned = warned || w.find("not_a_column") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("pipeline: keeps identifier columns out of the feature space") {
  const Dataset ds = small_dataset(100, 29);
  PipelineConfig cfg;
  cfg.drop_columns = {"loan_amount"};  // leaves member_id and zip_code in
  Pipeline p{cfg};
  CHECK_THROWS_AS(p.fit(ds), UnknownColumn);
}

TEST_CASE("pipeline: JSON round-trip reproduces the applied matrix") {
  const Dataset ds = small_dataset(250, 31, 0.1);
  Pipeline p{PipelineConfig{}};
  p.fit(ds);
  const FeatureMatrix before = p.apply(ds);

  const nlohmann::json doc = p.to_json();
  const Pipeline restored = Pipeline::from_json(doc);
  const FeatureMatrix after = restored.apply(ds);

  CHECK(before.column_names == after.column_names);
  CHECK(before.values == after.values);
  CHECK(doc == restored.to_json());
}
