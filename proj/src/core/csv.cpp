#include "stopspacing/csv.hpp"

#include <charconv>
#include <cmath>

namespace stopspacing::csv {

namespace {

constexpr std::string_view kUtf8Bom = "\xEF\xBB\xBF";

}  // namespace

Reader::Reader(std::string_view text, char delimiter)
    : text_(text), delimiter_(delimiter) {
  if (text_.substr(0, kUtf8Bom.size()) == kUtf8Bom) {
    pos_ = kUtf8Bom.size();
  }
}

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  while (pos_ < text_.size()) {
    // Skip blank lines.
    if (text_[pos_] == '\n') {
      ++pos_;
      ++line_;
      continue;
    }
    if (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
      pos_ += 2;
      ++line_;
      continue;
    }
    break;
  }
  if (pos_ >= text_.size()) return false;

  record_line_ = line_;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (in_quotes) {
      if (c == '"') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
          continue;
        }
        in_quotes = false;
        ++pos_;
        continue;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
      continue;
    }
    if (c == '"' && (field.empty() || trim(field).empty()) && !field_was_quoted) {
      field.clear();
      in_quotes = true;
      field_was_quoted = true;
      ++pos_;
      continue;
    }
    if (c == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
      ++pos_;
      continue;
    }
    if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
      pos_ += 2;
      ++line_;
      fields.push_back(std::move(field));
      return true;
    }
    if (c == '\n') {
      ++pos_;
      ++line_;
      fields.push_back(std::move(field));
      return true;
    }
    field.push_back(c);
    ++pos_;
  }
  fields.push_back(std::move(field));
  return true;
}

Table::Table(std::string_view text, char delimiter) : reader_(text, delimiter) {
  if (reader_.next(header_)) {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      header_[i] = std::string(trim(header_[i]));
      index_.emplace(header_[i], i);
    }
  }
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Table::next() { return !header_.empty() && reader_.next(row_); }

std::string_view Table::field(std::optional<std::size_t> index) const {
  if (!index || *index >= row_.size()) return {};
  return trim(row_[*index]);
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string escape(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
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

}  // namespace stopspacing::csv
