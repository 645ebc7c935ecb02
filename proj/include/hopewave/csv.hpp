#ifndef HOPEWAVE_CSV_HPP
#define HOPEWAVE_CSV_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hopewave/error.hpp"

namespace hopewave::csv {

inline constexpr const char* kSkipped = "skipped";

/// Header plus rows of pre-formatted cells. Cells never contain commas,
/// quotes or newlines, so no quoting is needed.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw ShapeError("row has " + std::to_string(row.size()) + " cells, header has " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InputError("no column '" + name + "'");
  }

  friend bool operator==(const Table&, const Table&) = default;
};

inline std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string number(const std::optional<double>& v) { return v ? number(*v) : kSkipped; }

inline std::optional<double> parse_number(const std::string& cell) {
  if (cell == kSkipped) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("not a number: '" + cell + "'");
}

inline void write(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
}

inline std::string to_string(const Table& t) {
  std::ostringstream ss;
  write(ss, t);
  return ss.str();
}

inline void write_file(const Table& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write(out, t);
  if (!out) throw InputError("write failed for '" + path + "'");
}

inline Table read(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.columns.size()) throw ParseError(lineno, "expected " + std::to_string(t.columns.size()) + " cells");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read(in);
}

}  // namespace hopewave::csv

#endif
