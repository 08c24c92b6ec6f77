#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tripweave {

// Calendar timestamps are civil (wall-clock) time with no timezone attached,
// stored as seconds since 1970-01-01 00:00:00.

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

// Proleptic Gregorian day count since 1970-01-01.
int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(int64_t days);

bool valid_civil(int year, int month, int day);

enum class TimestampFormat {
  us_12h,   // MM/DD/YYYY hh:mm:ss AM
  iso_24h,  // YYYY-MM-DD HH:MM:SS
};

std::optional<TimestampFormat> timestamp_format_from_name(std::string_view name);
std::string_view timestamp_format_name(TimestampFormat fmt);

std::optional<int64_t> parse_timestamp(std::string_view text, TimestampFormat fmt);
std::string format_timestamp(int64_t ts, TimestampFormat fmt);

// YYYY-MM-DD
std::optional<CivilDate> parse_date(std::string_view text);
std::string format_date(const CivilDate& d);

inline int64_t epoch_day(int64_t ts) { return ts >= 0 ? ts / 86400 : (ts - 86399) / 86400; }
inline int second_of_day(int64_t ts) { return static_cast<int>(ts - epoch_day(ts) * 86400); }
inline int hour_of_day(int64_t ts) { return second_of_day(ts) / 3600; }
inline CivilDate date_of(int64_t ts) { return civil_from_days(epoch_day(ts)); }

inline int64_t civil_seconds(int year, int month, int day, int hh = 0, int mm = 0, int ss = 0) {
  return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

}  // namespace tripweave
