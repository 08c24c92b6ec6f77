#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tripweave {

// Money is carried as integer cents; doubles appear only at reporting boundaries.

// Accepts "12.5", "$1,234.56", "-3". More than two decimals round half away from zero.
std::optional<int64_t> parse_money_cents(std::string_view text);

std::string format_money(int64_t cents);

inline double cents_to_usd(int64_t cents) { return static_cast<double>(cents) / 100.0; }

}  // namespace tripweave
