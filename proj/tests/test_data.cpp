#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "dpcm/data/csv.hpp"
#include "dpcm/data/sampling.hpp"
#include "dpcm/data/synthetic.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"

using namespace dpcm;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dpcm_test_" + name);
}

const char* kHeader =
    "member_id,loan_amount,total_funded_amount,term_months,interest_rate,"
    "annual_income,dti,state,zip_code,home_ownership,purpose,loan_status,"
    "total_recovered_principal,recoveries";

bool records_equal(const LoanRecord& a, const LoanRecord& b) {
  return a.member_id == b.member_id && a.loan_amount == b.loan_amount &&
         a.total_funded_amount == b.total_funded_amount &&
         a.term_months == b.term_months && a.interest_rate == b.interest_rate &&
         a.annual_income == b.annual_income && a.dti == b.dti &&
         a.state == b.state && a.zip_code == b.zip_code &&
         a.home_ownership == b.home_ownership && a.purpose == b.purpose &&
         a.loan_status == b.loan_status &&
         a.total_recovered_principal == b.total_recovered_principal &&
         a.recoveries == b.recoveries;
}

}  // namespace

TEST_CASE("load_csv: well-formed rows parse") {
  const auto path = temp_file("ok.csv");
  write_file_atomic(
      path,
      std::string(kHeader) +
          "\n"
          "m1,10000.00,10000.00,36,12.5,65000.00,18.2,CA,94110,RENT,"
          "credit_card,FULLY_PAID,10000.00,0.00\n"
          "m2,5000.00,5000.00,60,22.1,,-,TX,75001,MORTGAGE,debt_consolidation,"
          "CHARGED_OFF,1000.00,250.00\n"
          "m3,8000.00,8000.00,36,9.9,42000.00,11.0,NY,10001,OWN,car,CURRENT,"
          "2000.00,0.00\n");
  // row 2 has a malformed dti ("-"): strict load fails, lenient skips it.
  CHECK_THROWS_AS(load_csv(path, true), ParseError);
  const LoadResult lenient = load_csv(path, false);
  CHECK(lenient.rows_parsed == 2);
  CHECK(lenient.rows_skipped == 1);

  const auto path2 = temp_file("ok2.csv");
  write_file_atomic(
      path2,
      std::string(kHeader) +
          "\n"
          "m1,10000.00,10000.00,36,12.5,65000.00,18.2,CA,94110,RENT,"
          "credit_card,FULLY_PAID,10000.00,0.00\n"
          "m2,5000.00,5000.00,60,22.1,,,TX,75001,MORTGAGE,debt_consolidation,"
          "CHARGED_OFF,1000.00,250.00\n"
          "m3,8000.00,8000.00,36,9.9,42000.00,11.0,NY,10001,OWN,car,CURRENT,"
          "2000.00,0.00\n");
  const LoadResult strict = load_csv(path2, true);
  CHECK(strict.dataset.size() == 3);
  CHECK(strict.dataset.records[1].annual_income == std::nullopt);
  CHECK(strict.dataset.records[1].dti == std::nullopt);
  CHECK(strict.dataset.records[0].loan_amount == 1000000);  // cents
}

TEST_CASE("load_csv: missing column is named") {
  const auto path = temp_file("missing_col.csv");
  write_file_atomic(path,
                    "member_id,loan_amount,total_funded_amount,term_months,"
                    "interest_rate,annual_income,dti,state,zip_code,"
                    "home_ownership,purpose,loan_status,"
                    "total_recovered_principal\nx\n");
  try {
    load_csv(path, true);
    FAIL("expected SchemaMismatch");
  } catch (const SchemaMismatch& e) {
    CHECK(std::string(e.what()).find("recoveries") != std::string::npos);
  }
}

TEST_CASE("load_csv: record invariant violations carry the row") {
  const auto path = temp_file("invariant.csv");
  write_file_atomic(
      path, std::string(kHeader) +
                "\n"
                "m1,10000.00,10000.00,36,12.5,65000.00,18.2,CA,94110,RENT,"
                "credit_card,FULLY_PAID,12000.00,0.00\n");
  CHECK_THROWS_AS(load_csv(path, true), RecordInvariantViolation);
  const LoadResult lenient = load_csv(path, false);
  CHECK(lenient.rows_skipped == 1);
}

TEST_CASE("load_csv: duplicate member ids are rejected") {
  const auto path = temp_file("dup.csv");
  write_file_atomic(
      path, std::string(kHeader) +
                "\n"
                "m1,100.00,100.00,36,5.31,,,CA,94110,RENT,car,CURRENT,0.00,0.00\n"
                "m1,100.00,100.00,36,5.31,,,CA,94110,RENT,car,CURRENT,0.00,0.00\n");
  CHECK_THROWS_AS(load_csv(path, true), RecordInvariantViolation);
}

TEST_CASE("generate_synthetic: deterministic and sized") {
  SyntheticConfig cfg;
  cfg.n = 2000;
  cfg.seed = 7;
  const Dataset a = generate_synthetic(cfg);
  const Dataset b = generate_synthetic(cfg);
  REQUIRE(a.size() == 2000);
  REQUIRE(b.size() == 2000);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(records_equal(a.records[i], b.records[i]));
  std::set<std::string> ids;
  for (const auto& r : a.records) ids.insert(r.member_id);
  CHECK(ids.size() == a.size());
  for (const auto& r : a.records) CHECK(validate_record(r).empty());
}

TEST_CASE("generate_synthetic: zero default rate means zero defaults") {
  SyntheticConfig cfg;
  cfg.n = 1000;
  cfg.seed = 3;
  cfg.default_rate = 0.0;
  const Dataset ds = generate_synthetic(cfg);
  for (const auto& r : ds.records) CHECK(!is_defaulted(r));
}

TEST_CASE("generate_synthetic: default rate concentrates near the target") {
  SyntheticConfig cfg;
  cfg.n = 10000;
  cfg.seed = 11;
  cfg.default_rate = 0.12;
  const Dataset ds = generate_synthetic(cfg);
  std::size_t defaults = 0;
  for (const auto& r : ds.records) defaults += is_defaulted(r) ? 1 : 0;
  const double rate = static_cast<double>(defaults) / 10000.0;
  CHECK(rate > 0.11);
  CHECK(rate < 0.13);
}

TEST_CASE("generate_synthetic: recovery probability shapes defaulted records") {
  SyntheticConfig cfg;
  cfg.n = 8000;
  cfg.seed = 13;
  const Dataset ds = generate_synthetic(cfg);
  std::size_t defaulted = 0, with_recovery = 0;
  for (const auto& r : ds.records) {
    if (!is_defaulted(r)) {
      CHECK(r.recoveries == 0);
      continue;
    }
    ++defaulted;
    if (r.recoveries > 0) ++with_recovery;
  }
  REQUIRE(defaulted > 500);
  const double frac = static_cast<double>(with_recovery) /
                      static_cast<double>(defaulted);
  CHECK(frac > 0.52);
  CHECK(frac < 0.68);
}

TEST_CASE("generate_synthetic: invalid config rejected") {
  SyntheticConfig cfg;
  cfg.n = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg.n = 10;
  cfg.default_rate = 1.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
}

TEST_CASE("split: 80:20 arithmetic") {
  SyntheticConfig cfg;
  cfg.n = 39000;
  cfg.seed = 7;
  const Dataset ds = generate_synthetic(cfg);
  const auto [train, test] = split(ds, {0.8, 42});
  CHECK(train.size() == 31200);
  CHECK(test.size() == 7800);
}

TEST_CASE("split: deterministic partition, seed-sensitive") {
  SyntheticConfig cfg;
  cfg.n = 500;
  cfg.seed = 5;
  const Dataset ds = generate_synthetic(cfg);

  const auto [train1, test1] = split(ds, {0.8, 42});
  const auto [train2, test2] = split(ds, {0.8, 42});
  REQUIRE(train1.size() == train2.size());
  for (std::size_t i = 0; i < train1.size(); ++i)
    CHECK(train1.records[i].member_id == train2.records[i].member_id);

  // Partition: every record lands in exactly one side.
  std::set<std::string> seen;
  for (const auto& r : train1.records) seen.insert(r.member_id);
  for (const auto& r : test1.records) CHECK(seen.insert(r.member_id).second);
  CHECK(seen.size() == ds.size());

  // A different seed produces a different membership vector.
  const auto [train3, _] = split(ds, {0.8, 43});
  std::set<std::string> m1, m3;
  for (const auto& r : train1.records) m1.insert(r.member_id);
  for (const auto& r : train3.records) m3.insert(r.member_id);
  CHECK(m1 != m3);
}

TEST_CASE("subsample: identity at fraction 1 and exact counts") {
  SyntheticConfig cfg;
  cfg.n = 10000;
  cfg.seed = 2;
  const Dataset ds = generate_synthetic(cfg);
  const Dataset all = subsample(ds, 1.0, 9);
  REQUIRE(all.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(all.records[i].member_id == ds.records[i].member_id);
  CHECK(subsample(ds, 0.5, 9).size() == 5000);
  CHECK_THROWS_AS(subsample(ds, 0.0, 9), InvalidFraction);
  CHECK_THROWS_AS(subsample(ds, 1.5, 9), InvalidFraction);
}

TEST_CASE("subsample: eight seeds give eight distinct member sets") {
  SyntheticConfig cfg;
  cfg.n = 2000;
  cfg.seed = 21;
  const Dataset ds = generate_synthetic(cfg);
  std::set<std::set<std::string>> sets;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Dataset sub = subsample(ds, 0.5, seed);
    std::set<std::string> ids;
    for (const auto& r : sub.records) ids.insert(r.member_id);
    sets.insert(std::move(ids));
  }
  CHECK(sets.size() == 8);
}

TEST_CASE("csv round-trip preserves every field") {
  SyntheticConfig cfg;
  cfg.n = 300;
  cfg.seed = 17;
  cfg.missing_rate = 0.2;
  const Dataset original = generate_synthetic(cfg);
  const auto path = temp_file("roundtrip.csv");
  write_csv(original, path);
  const Dataset loaded = load_csv(path, true).dataset;
  REQUIRE(loaded.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i)
    CHECK(records_equal(original.records[i], loaded.records[i]));
}

TEST_CASE("currency parsing is exact to the cent") {
  CHECK(parse_currency("1234.56") == Cents{123456});
  CHECK(parse_currency("1234.5") == Cents{123450});
  CHECK(parse_currency("1234") == Cents{123400});
  CHECK(parse_currency("-12.34") == Cents{-1234});
  CHECK(parse_currency("0.00") == Cents{0});
  CHECK(!parse_currency("12.345").has_value());
  CHECK(!parse_currency("12,345").has_value());
  CHECK(!parse_currency("").has_value());
  CHECK(!parse_currency("abc").has_value());
  CHECK(format_currency(123456) == "1234.56");
  CHECK(format_currency(-1234) == "-12.34");
}
