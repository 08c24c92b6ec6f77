#include "tripweave/money.hpp"

#include <cstdio>
#include <cstdlib>

namespace tripweave {

std::optional<int64_t> parse_money_cents(std::string_view text) {
  size_t i = 0, n = text.size();
  while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
  while (n > i && (text[n - 1] == ' ' || text[n - 1] == '\t' || text[n - 1] == '\r')) --n;
  if (i >= n) return std::nullopt;

  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  if (i < n && text[i] == '$') ++i;

  int64_t dollars = 0;
  bool any_digit = false;
  while (i < n && (text[i] == ',' || (text[i] >= '0' && text[i] <= '9'))) {
    if (text[i] == ',') {
      ++i;
      continue;
    }
    if (dollars > (INT64_MAX - 9) / 10) return std::nullopt;
    dollars = dollars * 10 + (text[i] - '0');
    any_digit = true;
    ++i;
  }

  int64_t cents = 0;
  if (i < n && text[i] == '.') {
    ++i;
    int frac_digits = 0;
    int round_digit = -1;
    while (i < n && text[i] >= '0' && text[i] <= '9') {
      const int d = text[i] - '0';
      if (frac_digits == 0) cents += d * 10;
      else if (frac_digits == 1) cents += d;
      else if (frac_digits == 2) round_digit = d;
      ++frac_digits;
      ++i;
      any_digit = true;
    }
    if (frac_digits == 0) return std::nullopt;  // bare trailing dot
    if (round_digit >= 5) ++cents;
  }
  if (!any_digit || i != n) return std::nullopt;

  int64_t total = dollars * 100 + cents;
  return negative ? -total : total;
}

std::string format_money(int64_t cents) {
  const bool neg = cents < 0;
  const int64_t abs = neg ? -cents : cents;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", neg ? "-" : "",
                static_cast<long long>(abs / 100), static_cast<long long>(abs % 100));
  return buf;
}

}  // namespace tripweave
