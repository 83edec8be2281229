#include "dpcm/money.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace dpcm {

Cents cents_from_dollars(double d) {
  return static_cast<Cents>(std::llround(d * 100.0));
}

std::optional<Cents> parse_currency(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '-' || text[i] == '+') {
    negative = text[i] == '-';
    ++i;
  }
  if (i >= text.size()) return std::nullopt;
  Cents whole = 0;
  bool any_digit = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
    whole = whole * 10 + (text[i] - '0');
    any_digit = true;
    if (whole > 92233720368547758LL) return std::nullopt;  // would overflow in cents
  }
  Cents frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    int digits = 0;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      if (++digits > 2) return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
      any_digit = true;
    }
    if (digits == 1) frac *= 10;
  }
  if (!any_digit || i != text.size()) return std::nullopt;
  const Cents magnitude = whole * 100 + frac;
  return negative ? -magnitude : magnitude;
}

std::string format_currency(Cents c) {
  const bool negative = c < 0;
  const Cents magnitude = negative ? -c : c;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", negative ? "-" : "",
                static_cast<long long>(magnitude / 100),
                static_cast<long long>(magnitude % 100));
  return buf;
}

std::string format_whole_dollars(Cents c) {
  const long long d = std::llround(static_cast<double>(c) / 100.0);
  return std::to_string(d);
}

std::string format_double_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_truncated(double v, int decimals) {
  double scale = 1.0;
  for (int i = 0; i < decimals; ++i) scale *= 10.0;
  const double t = std::trunc(v * scale) / scale;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, t);
  return buf;
}

}  // namespace dpcm
