#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rangeshift/error.hpp"

namespace rangeshift::csv {

/// Shortest decimal form that parses back to the same double.
inline std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format(const std::optional<double>& v) { return v ? format(*v) : std::string(); }

inline std::optional<double> parse_cell(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ConfigError("", "malformed numeric CSV cell '" + std::string(cell) + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw ConfigError(name, "column missing from CSV");
  }
};

inline Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open CSV file");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path, "empty CSV file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    t.rows.back().resize(t.header.size());
  }
  return t;
}

}  // namespace rangeshift::csv
