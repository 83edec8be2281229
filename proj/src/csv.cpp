#include "dpcm/data/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"

namespace dpcm {

namespace {

std::optional<double> parse_double(const std::string& s) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
    return std::nullopt;
  return value;
}

std::optional<long long> parse_int(const std::string& s) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  long long value = 0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return value;
}

[[noreturn]] void fail_cell(std::size_t row, const std::string& column,
                            const std::string& what) {
  std::ostringstream msg;
  msg << "row " << row << ", column '" << column << "': " << what;
  throw ParseError(msg.str());
}

LoanRecord parse_row(const std::vector<std::string>& fields,
                     const std::unordered_map<std::string, std::size_t>& index,
                     std::size_t row) {
  auto cell = [&](const std::string& column) -> const std::string& {
    return fields[index.at(column)];
  };
  auto currency = [&](const std::string& column) -> Cents {
    const auto v = parse_currency(cell(column));
    if (!v) fail_cell(row, column, "invalid currency value '" + cell(column) + "'");
    return *v;
  };

  LoanRecord r;
  r.member_id = cell("member_id");
  r.loan_amount = currency("loan_amount");
  r.total_funded_amount = currency("total_funded_amount");

  const auto term = parse_int(cell("term_months"));
  if (!term) fail_cell(row, "term_months", "not an integer");
  r.term_months = static_cast<int>(*term);

  const auto rate = parse_double(cell("interest_rate"));
  if (!rate) fail_cell(row, "interest_rate", "not a number");
  r.interest_rate = *rate;

  if (!cell("annual_income").empty()) {
    const auto income = parse_currency(cell("annual_income"));
    if (!income) fail_cell(row, "annual_income", "invalid currency value");
    r.annual_income = *income;
  }
  if (!cell("dti").empty()) {
    const auto dti = parse_double(cell("dti"));
    if (!dti) fail_cell(row, "dti", "not a number");
    r.dti = *dti;
  }

  r.state = cell("state");
  r.zip_code = cell("zip_code");

  const auto home = home_ownership_from_string(cell("home_ownership"));
  if (!home) fail_cell(row, "home_ownership", "unknown value '" + cell("home_ownership") + "'");
  r.home_ownership = *home;

  const auto purpose = purpose_from_string(cell("purpose"));
  if (!purpose) fail_cell(row, "purpose", "unknown value '" + cell("purpose") + "'");
  r.purpose = *purpose;

  const auto status = loan_status_from_string(cell("loan_status"));
  if (!status) fail_cell(row, "loan_status", "unknown value '" + cell("loan_status") + "'");
  r.loan_status = *status;

  r.total_recovered_principal = currency("total_recovered_principal");
  r.recoveries = currency("recoveries");
  return r;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

LoadResult load_csv(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string header_line;
  if (!std::getline(in, header_line))
    throw SchemaMismatch("empty file: " + path.string());
  const std::vector<std::string> header = split_csv_line(header_line);

  const auto& schema = csv_schema_columns();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!index.emplace(header[i], i).second)
      throw SchemaMismatch("duplicate column '" + header[i] + "'");
  }
  for (const auto& name : schema) {
    if (!index.count(name)) throw SchemaMismatch("missing column '" + name + "'");
  }
  for (const auto& name : header) {
    bool known = false;
    for (const auto& col : schema) known = known || col == name;
    if (!known) throw SchemaMismatch("unknown column '" + name + "'");
  }

  LoadResult result;
  result.dataset.provenance = Provenance::Csv;
  std::string line;
  std::size_t row = 1;  // header is row 0
  std::unordered_map<std::string, std::size_t> seen_ids;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      ++row;
      continue;
    }
    try {
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() != header.size()) {
        std::ostringstream msg;
        msg << "row " << row << ": expected " << header.size()
            << " fields, found " << fields.size();
        throw ParseError(msg.str());
      }
      LoanRecord rec = parse_row(fields, index, row);
      const std::string violation = validate_record(rec);
      if (!violation.empty()) {
        std::ostringstream msg;
        msg << "row " << row << ": " << violation;
        throw RecordInvariantViolation(msg.str());
      }
      const auto [it, inserted] = seen_ids.emplace(rec.member_id, row);
      if (!inserted) {
        std::ostringstream msg;
        msg << "row " << row << ": duplicate member_id '" << rec.member_id
            << "' (first seen at row " << it->second << ")";
        throw RecordInvariantViolation(msg.str());
      }
      result.dataset.records.push_back(std::move(rec));
      ++result.rows_parsed;
    } catch (const Error& e) {
      if (strict) throw;
      ++result.rows_skipped;
      if (result.warnings.size() < 20) result.warnings.push_back(e.what());
    }
    ++row;
  }
  return result;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  const auto& schema = csv_schema_columns();
  for (std::size_t i = 0; i < schema.size(); ++i)
    out << schema[i] << (i + 1 < schema.size() ? "," : "\n");
  for (const auto& r : dataset.records) {
    out << r.member_id << ',' << format_currency(r.loan_amount) << ','
        << format_currency(r.total_funded_amount) << ',' << r.term_months
        << ',' << format_double_shortest(r.interest_rate) << ','
        << (r.annual_income ? format_currency(*r.annual_income) : "") << ','
        << (r.dti ? format_double_shortest(*r.dti) : "") << ',' << r.state
        << ',' << r.zip_code << ',' << to_string(r.home_ownership) << ','
        << to_string(r.purpose) << ',' << to_string(r.loan_status) << ','
        << format_currency(r.total_recovered_principal) << ','
        << format_currency(r.recoveries) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace dpcm
