#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dpcm/data/loan.hpp"

namespace dpcm {

struct LoadResult {
  Dataset dataset;
  std::size_t rows_parsed = 0;
  std::size_t rows_skipped = 0;  // lenient mode only
  std::vector<std::string> warnings;
};

/// Reads a loan CSV. The header must contain exactly the schema columns (any
/// order). In strict mode the first bad row aborts the load with ParseError
/// or RecordInvariantViolation; in lenient mode bad rows are skipped and
/// counted. Throws SchemaMismatch naming the offending column.
LoadResult load_csv(const std::filesystem::path& path, bool strict = true);

/// Writes the dataset in schema column order, currency at two decimals,
/// missing optionals as empty fields.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Shared low-level helpers (no quoting: schema fields never contain commas).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dpcm
