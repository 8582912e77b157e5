#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "bcast/errors.hpp"

namespace bcast::cli {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_cell(const Cell& cell) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(V{}, cell);
}

nlohmann::json cell_json(const Cell& cell) {
  struct V {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(double v) const {
      if (!std::isfinite(v)) return nullptr;
      // round trip through the printed form so JSON and CSV carry the same digits
      return std::stod(format_real(v));
    }
    nlohmann::json operator()(const std::string& v) const { return v; }
    nlohmann::json operator()(bool v) const { return v; }
  };
  return std::visit(V{}, cell);
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw input_error("row width does not match the table header");
  rows.push_back(std::move(row));
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw input_error("format must be csv or json");
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string q = "\"";
  for (char c : field) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += quote(fields[i]);
  }
  return line;
}

std::string csv_line(const std::vector<Cell>& row) {
  std::vector<std::string> fields;
  fields.reserve(row.size());
  for (const auto& c : row) fields.push_back(format_cell(c));
  return csv_line(fields);
}

void write_report(std::ostream& out, const Report& report, Format format) {
  if (format == Format::Csv) {
    out << "# command=" << report.command << '\n';
    for (const auto& [k, v] : report.metadata) out << "# " << k << '=' << v << '\n';
    for (const auto& [k, v] : report.summary) out << "# result." << k << '=' << format_cell(v) << '\n';
    if (!report.table.columns.empty()) {
      out << csv_line(report.table.columns) << '\n';
      for (const auto& row : report.table.rows) out << csv_line(row) << '\n';
    }
    return;
  }
  nlohmann::ordered_json j;
  j["command"] = report.command;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = meta;
  for (const auto& [k, v] : report.summary) j[k] = cell_json(v);
  for (auto it = report.extra.begin(); it != report.extra.end(); ++it) j[it.key()] = it.value();
  if (!report.table.columns.empty()) {
    j["columns"] = report.table.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.table.rows) {
      nlohmann::ordered_json r;
      for (std::size_t i = 0; i < row.size(); ++i) r[report.table.columns[i]] = cell_json(row[i]);
      rows.push_back(r);
    }
    j["rows"] = rows;
  }
  out << j.dump(2) << '\n';
}

}  // namespace bcast::cli
