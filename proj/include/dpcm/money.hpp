#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dpcm {

/// Currency is carried as integer cents so portfolio sums are exact.
using Cents = std::int64_t;

inline double dollars(Cents c) { return static_cast<double>(c) / 100.0; }

Cents cents_from_dollars(double d);

/// Parses a decimal dollar amount ("1234", "1234.5", "1234.56") into cents.
/// Returns nullopt on malformed input or more than two fraction digits.
std::optional<Cents> parse_currency(const std::string& text);

/// "1234.56" — two fraction digits, no thousands separators.
std::string format_currency(Cents c);

/// Nearest whole dollar, for table-style output.
std::string format_whole_dollars(Cents c);

/// Shortest decimal form that parses back to the same double bit pattern.
std::string format_double_shortest(double v);

/// Fixed decimals, truncated toward zero (the tables print truncated values).
std::string format_truncated(double v, int decimals);

}  // namespace dpcm
