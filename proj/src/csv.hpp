#pragma once

// Minimal RFC 4180 style CSV reading/writing shared by the file formats.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace proxrec::csv {

class Reader {
 public:
  /// Throws proxrec::Error if the file cannot be opened.
  explicit Reader(const std::filesystem::path& path);

  /// Reads the next non-empty row. Returns false at end of file.
  bool next(std::vector<std::string>& fields);

  /// Line number of the row returned by the last next() call (1-based).
  std::size_t line() const noexcept { return row_line_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::ifstream in_;
  std::string name_;
  std::size_t line_ = 0;
  std::size_t row_line_ = 0;
};

void write_field(std::ostream& out, std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest representation that parses back to the same value.
std::string format_double(double v);
std::string format_float(float v);

std::optional<double> parse_double(std::string_view s);
std::optional<float> parse_float(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace proxrec::csv
