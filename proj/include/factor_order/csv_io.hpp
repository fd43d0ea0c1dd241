#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "factor_order/errors.hpp"
#include "factor_order/panel_spectra.hpp"

namespace factor_order {

// 17 significant digits: enough for a double to round-trip exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Rows = series, comma separated, no header; '#' lines carry free-form
// comments (the CLI echoes the generating configuration there).
inline void write_panel_csv(std::ostream& os, const Matrix& data,
                            const std::vector<std::string>& comment_lines = {}) {
  for (const auto& line : comment_lines) os << "# " << line << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      if (j) os << ',';
      os << format_g17(data(i, j));
    }
    os << '\n';
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Parse a panel; diagnostics carry 1-based file coordinates. Blank lines and
// '#' comments are skipped; skip_header drops the first data line.
inline Panel read_panel_csv(std::istream& is, bool skip_header = false) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool header_pending = skip_header;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view rest = detail::trim(line);
    if (rest.empty() || rest.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    long col_no = 0;
    while (true) {
      ++col_no;
      const std::size_t comma = rest.find(',');
      std::string_view cell =
          detail::trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
      if (cell.empty()) throw CsvParseError(line_no, col_no, "empty cell");
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw CsvParseError(line_no, col_no, "not a number: '" + std::string(cell) + "'");
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return validate_panel(rows);
}

}  // namespace factor_order
