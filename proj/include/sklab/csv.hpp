#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "sklab/errors.hpp"

namespace sklab {

/// Shortest form that round-trips: 17 significant digits.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Comma-separated table with a header row; fields are never quoted, so
/// they must not contain commas or newlines.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    detail::require(!header_.empty(), "csv: empty header");
  }

  class Row {
   public:
    Row& operator<<(double x) { return put(format_real(x)); }
    Row& operator<<(const std::string& s) { return put(s); }
    Row& operator<<(const char* s) { return put(s); }
    template <class I>
      requires(std::is_integral_v<I> && !std::is_same_v<I, bool>)
    Row& operator<<(I i) {
      return put(std::to_string(i));
    }
    Row& operator<<(bool b) { return put(b ? "true" : "false"); }

   private:
    friend class CsvTable;
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    Row& put(std::string s) {
      detail::require(s.find_first_of(",\n\r") == std::string::npos, "csv: field contains a separator: " + s);
      cells_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string>& cells_;
  };

  /// Starts a new row; fill it with <<.
  Row row() {
    close_row();
    rows_.emplace_back();
    return Row(rows_.back());
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    close_row();
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

 private:
  void close_row() const {
    if (!rows_.empty() && rows_.back().size() != header_.size())
      throw invalid_argument("csv: row has " + std::to_string(rows_.back().size()) + " fields, header has " +
                             std::to_string(header_.size()));
  }

  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace sklab

