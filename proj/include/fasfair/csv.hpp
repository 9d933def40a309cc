#pragma once

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasfair {

// 10 significant digits, locale-independent, trailing zeros dropped by the
// shortest-within-precision rule of to_chars.
inline std::string csv_number(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string csv_integer(long long v) { return std::to_string(v); }

// Plain comma-separated emitter with '\n' endings. All cell content is
// produced by this codebase, so commas, quotes, and newlines inside cells
// are programming errors rather than data to escape.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) {
    if (columns_ != 0) throw std::logic_error("csv header already written");
    if (names.empty()) throw std::logic_error("csv header must have columns");
    columns_ = names.size();
    write_line(names);
  }

  void row(const std::vector<std::string>& cells) {
    if (columns_ == 0) throw std::logic_error("csv row before header");
    if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
    write_line(cells);
    ++rows_;
  }

  std::size_t rows() const { return rows_; }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n\r") != std::string::npos)
        throw std::logic_error("csv cell contains a delimiter");
      if (i) out_ << ',';
      out_ << c;
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace fasfair
