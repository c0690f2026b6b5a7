#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bpop::csv {

/// A parsed CSV file: header plus rows of raw fields. Line numbers are 1-based
/// and refer to the physical line in the source (header is line 1).
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Column index of name; throws if absent.
  std::size_t column(std::string_view name) const;
};

/// Splits one line on commas. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

Table read(std::istream& in, std::string source_name);
Table read_file(const std::filesystem::path& path);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

double parse_double(std::string_view field, std::string_view context);
int parse_int(std::string_view field, std::string_view context);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace bpop::csv
