#include "tripweave/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace tripweave {

namespace {

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

bool CsvReader::next_row(std::vector<std::string>& out) {
  out.clear();
  if (!std::getline(in_, line_)) return false;
  strip_cr(line_);

  std::string field;
  bool in_quotes = false;
  size_t i = 0;
  while (true) {
    if (i >= line_.size()) {
      if (in_quotes) {
        // Quoted field continues on the next physical line.
        if (!std::getline(in_, line_)) break;  // unterminated quote at EOF: take what we have
        strip_cr(line_);
        field.push_back('\n');
        i = 0;
        continue;
      }
      break;
    }
    const char c = line_[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line_.size() && line_[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        field.push_back(c);
        ++i;
      }
    } else if (c == '"') {
      in_quotes = true;
      ++i;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      ++i;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  out.push_back(std::move(field));
  ++rows_read_;
  return true;
}

std::string csv_quote(std::string_view field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << csv_quote(fields[i]);
  }
  out.put('\n');
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && (text[b] == ' ' || text[b] == '\t')) ++b;
  while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t' || text[e - 1] == '\r')) --e;
  if (b >= e) return std::nullopt;
  double v = 0;
  auto res = std::from_chars(text.data() + b, text.data() + e, v);
  if (res.ec != std::errc() || res.ptr != text.data() + e) return std::nullopt;
  return v;
}

std::optional<int64_t> parse_int(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && (text[b] == ' ' || text[b] == '\t')) ++b;
  while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t' || text[e - 1] == '\r')) --e;
  if (b >= e) return std::nullopt;
  int64_t v = 0;
  auto res = std::from_chars(text.data() + b, text.data() + e, v);
  if (res.ec != std::errc() || res.ptr != text.data() + e) return std::nullopt;
  return v;
}

}  // namespace tripweave
