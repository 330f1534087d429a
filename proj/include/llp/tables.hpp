#pragma once

#include <charconv>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace llp {

// Shortest round-trip decimal form of a double.
inline std::string to_string_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// String-valued table with a flat key=value config block; the config is
// embedded in every output so a run can be reproduced from the file alone.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

using ConfigMap = std::map<std::string, std::string>;

// '#'-prefixed config lines, a header row, then one line per row.
inline void write_csv(std::ostream& out, const Table& table,
                      const ConfigMap& config) {
  for (const auto& [key, value] : config) {
    out << "# " << key << "=" << value << "\n";
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << row[c];
    }
    out << "\n";
  }
}

inline nlohmann::json table_to_json(const Table& table, const ConfigMap& config) {
  nlohmann::json j;
  j["config"] = config;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      obj[table.columns[c]] = row[c];
    }
    rows.push_back(std::move(obj));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace llp
