#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace bcast::cli {

// Empty cells print as nothing in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

std::string format_real(double x);  // 12 significant digits
std::string format_cell(const Cell& cell);
nlohmann::json cell_json(const Cell& cell);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, Cell>> summary;
  Table table;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // merged into the top level of JSON output
};

enum class Format { Csv, Json };

Format parse_format(const std::string& text);
void write_report(std::ostream& out, const Report& report, Format format);
// CSV line for one row, quoting fields that need it.
std::string csv_line(const std::vector<Cell>& row);
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace bcast::cli
