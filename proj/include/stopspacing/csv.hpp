#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stopspacing::csv {

// Streaming RFC 4180 reader over an in-memory buffer. A leading UTF-8 BOM is
// skipped; CRLF and LF line endings are both accepted; quoted fields may
// contain delimiters, doubled quotes and line breaks.
class Reader {
 public:
  explicit Reader(std::string_view text, char delimiter = ',');

  // Reads the next record into `fields`. Returns false at end of input.
  // Blank lines are skipped.
  bool next(std::vector<std::string>& fields);

  // 1-based line number where the most recently returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  char delimiter_;
};

// Header-addressed view of a delimited table. Unknown columns are kept but
// never required; header names are trimmed and matched exactly.
class Table {
 public:
  explicit Table(std::string_view text, char delimiter = ',');

  const std::vector<std::string>& header() const { return header_; }
  std::optional<std::size_t> column(std::string_view name) const;
  bool has_column(std::string_view name) const { return column(name).has_value(); }

  // Advances to the next data row. Returns false at end of input.
  bool next();
  std::size_t line() const { return reader_.line(); }

  // Field of the current row, trimmed; empty when the column is absent or the
  // row is short.
  std::string_view field(std::optional<std::size_t> index) const;
  std::string_view field(std::string_view name) const { return field(column(name)); }

 private:
  Reader reader_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> row_;
};

std::string_view trim(std::string_view s);
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Quotes a field when it contains the delimiter, a quote or a line break.
std::string escape(std::string_view field, char delimiter = ',');

}  // namespace stopspacing::csv
