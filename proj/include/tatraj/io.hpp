#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tatraj {

// Parsed CSV with a header row. Fields are unquoted; `lines` holds the
// 1-based source line of each data row for error messages.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  // Index of a header column; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;
};

// RFC-4180-ish: comma separated, double-quoted fields with "" escapes,
// LF or CRLF line endings, blank lines skipped.
CsvTable parse_csv(std::string_view text, std::string_view source);
CsvTable read_csv_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// Stable 64-bit FNV-1a digest, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace tatraj
