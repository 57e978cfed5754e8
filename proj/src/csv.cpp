#include "csv.hpp"

#include <array>
#include <cmath>

#include "proxrec/errors.hpp"

namespace proxrec::csv {

Reader::Reader(const std::filesystem::path& path) : in_(path), name_(path.string()) {
  if (!in_) throw Error("cannot open " + name_);
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    row_line_ = line_;
    fields.clear();
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
      if (i == line.size()) {
        if (!quoted) break;
        // quoted field spans a newline
        std::string more;
        if (!std::getline(in_, more)) throw ParseError(name_, row_line_, "unterminated quoted field");
        ++line_;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      char c = line[i++];
      if (quoted) {
        if (c == '"') {
          if (i < line.size() && line[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    fields.push_back(std::move(field));
    return true;
  }
  return false;
}

void write_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string format_float(float v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

namespace {
template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return v;
}
}  // namespace

std::optional<double> parse_double(std::string_view s) { return parse_number<double>(s); }
std::optional<float> parse_float(std::string_view s) { return parse_number<float>(s); }
std::optional<std::uint64_t> parse_u64(std::string_view s) { return parse_number<std::uint64_t>(s); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace proxrec::csv
