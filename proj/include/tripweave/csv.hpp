#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tripweave {

// Streaming RFC-4180-ish reader: quoted fields, embedded commas/quotes/newlines, CRLF.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Fills `out` with the next record's fields; returns false at end of input.
  bool next_row(std::vector<std::string>& out);

  size_t rows_read() const { return rows_read_; }

 private:
  std::istream& in_;
  std::string line_;
  size_t rows_read_ = 0;
};

std::string csv_quote(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<int64_t> parse_int(std::string_view text);

}  // namespace tripweave
