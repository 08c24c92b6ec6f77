#include "tripweave/timestamp.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace tripweave {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kDays[m - 1];
}

// Reads exactly 1..max_digits decimal digits starting at pos; advances pos.
std::optional<int> read_int(std::string_view s, size_t& pos, int max_digits) {
  int value = 0;
  int n = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && n < max_digits) {
    value = value * 10 + (s[pos] - '0');
    ++pos;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return value;
}

bool expect(std::string_view s, size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

int64_t days_from_civil(int y, int m, int d) {
  // Howard Hinnant's civil-days algorithm.
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

CivilDate civil_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool valid_civil(int year, int month, int day) {
  if (year < 1400 || year > 9999) return false;
  if (month < 1 || month > 12) return false;
  return day >= 1 && day <= days_in_month(year, month);
}

std::optional<TimestampFormat> timestamp_format_from_name(std::string_view name) {
  if (name == "us_12h" || name == "us12") return TimestampFormat::us_12h;
  if (name == "iso_24h" || name == "iso") return TimestampFormat::iso_24h;
  return std::nullopt;
}

std::string_view timestamp_format_name(TimestampFormat fmt) {
  return fmt == TimestampFormat::us_12h ? "us_12h" : "iso_24h";
}

std::optional<int64_t> parse_timestamp(std::string_view text, TimestampFormat fmt) {
  std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;
  size_t pos = 0;
  int year, month, day, hour, minute, second;

  if (fmt == TimestampFormat::us_12h) {
    auto mo = read_int(s, pos, 2);
    if (!mo || !expect(s, pos, '/')) return std::nullopt;
    auto da = read_int(s, pos, 2);
    if (!da || !expect(s, pos, '/')) return std::nullopt;
    auto ye = read_int(s, pos, 4);
    if (!ye || !expect(s, pos, ' ')) return std::nullopt;
    auto hh = read_int(s, pos, 2);
    if (!hh || !expect(s, pos, ':')) return std::nullopt;
    auto mi = read_int(s, pos, 2);
    if (!mi) return std::nullopt;
    int ss = 0;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      auto se = read_int(s, pos, 2);
      if (!se) return std::nullopt;
      ss = *se;
    }
    if (!expect(s, pos, ' ')) return std::nullopt;
    if (pos + 2 > s.size()) return std::nullopt;
    char a = s[pos], b = s[pos + 1];
    bool pm;
    if ((a == 'A' || a == 'a') && (b == 'M' || b == 'm')) pm = false;
    else if ((a == 'P' || a == 'p') && (b == 'M' || b == 'm')) pm = true;
    else return std::nullopt;
    pos += 2;
    if (pos != s.size()) return std::nullopt;
    if (*hh < 1 || *hh > 12) return std::nullopt;
    hour = *hh % 12 + (pm ? 12 : 0);
    year = *ye;
    month = *mo;
    day = *da;
    minute = *mi;
    second = ss;
  } else {
    auto ye = read_int(s, pos, 4);
    if (!ye || !expect(s, pos, '-')) return std::nullopt;
    auto mo = read_int(s, pos, 2);
    if (!mo || !expect(s, pos, '-')) return std::nullopt;
    auto da = read_int(s, pos, 2);
    if (!da) return std::nullopt;
    if (!expect(s, pos, ' ') && !expect(s, pos, 'T')) return std::nullopt;
    auto hh = read_int(s, pos, 2);
    if (!hh || !expect(s, pos, ':')) return std::nullopt;
    auto mi = read_int(s, pos, 2);
    if (!mi) return std::nullopt;
    int ss = 0;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      auto se = read_int(s, pos, 2);
      if (!se) return std::nullopt;
      ss = *se;
    }
    if (pos != s.size()) return std::nullopt;
    if (*hh > 23) return std::nullopt;
    hour = *hh;
    year = *ye;
    month = *mo;
    day = *da;
    minute = *mi;
    second = ss;
  }

  if (!valid_civil(year, month, day)) return std::nullopt;
  if (minute > 59 || second > 59) return std::nullopt;
  return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_timestamp(int64_t ts, TimestampFormat fmt) {
  const CivilDate d = date_of(ts);
  const int sod = second_of_day(ts);
  const int hh = sod / 3600, mi = (sod / 60) % 60, ss = sod % 60;
  char buf[32];
  if (fmt == TimestampFormat::us_12h) {
    const bool pm = hh >= 12;
    int h12 = hh % 12;
    if (h12 == 0) h12 = 12;
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d %02d:%02d:%02d %s", d.month, d.day, d.year, h12, mi,
                  ss, pm ? "PM" : "AM");
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", d.year, d.month, d.day, hh, mi, ss);
  }
  return buf;
}

std::optional<CivilDate> parse_date(std::string_view text) {
  std::string_view s = trim(text);
  size_t pos = 0;
  auto ye = read_int(s, pos, 4);
  if (!ye || !expect(s, pos, '-')) return std::nullopt;
  auto mo = read_int(s, pos, 2);
  if (!mo || !expect(s, pos, '-')) return std::nullopt;
  auto da = read_int(s, pos, 2);
  if (!da || pos != s.size()) return std::nullopt;
  if (!valid_civil(*ye, *mo, *da)) return std::nullopt;
  return CivilDate{*ye, *mo, *da};
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

}  // namespace tripweave
