#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace windoffer::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Index of `name` in the header; throws ValidationError naming the file
  // when the column is absent.
  std::size_t column(std::string_view name, std::string_view source) const;
};

// Reads a comma-separated file with a header line. Blank lines are skipped,
// surrounding whitespace is trimmed from every field.
Table read(std::istream& in);
Table read_file(const std::string& path);

double parse_double(std::string_view text, std::size_t line, std::string_view column);
int parse_int(std::string_view text, std::size_t line, std::string_view column);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace windoffer::csv
