#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bagvote::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180-style parsing: comma separated, optional double quotes, CRLF or LF
// line endings. A UTF-8 byte-order mark on the first line is skipped. Every
// row must have as many cells as the header.
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

void write(std::ostream& out, const Table& table);
void write(const std::filesystem::path& path, const Table& table);

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Parses a finite decimal number; `row` is the 0-based data row used in the
// error message. Throws Errc::kParse on empty, trailing garbage, NaN or inf.
double parse_double(std::string_view cell, std::size_t row, std::string_view column);
long long parse_integer(std::string_view cell, std::size_t row, std::string_view column);

}  // namespace bagvote::csv
