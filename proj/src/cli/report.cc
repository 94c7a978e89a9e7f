#include "gradnoise/cli/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gradnoise::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

Json value_to_json(const Value& v) {
  if (const double* x = std::get_if<double>(&v)) return Json(*x);
  return Json(std::get<std::string>(v));
}

Value value_from_json(const Json& j) {
  if (j.is_number()) return number(j.get<double>());
  if (j.is_string()) return text(j.get<std::string>());
  throw std::invalid_argument("report values must be numbers or strings");
}

std::string csv_cell(const Value& v) {
  std::string s = format_value(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void write_table_body(const Table& table, std::ostringstream& os) {
  for (size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << csv_cell(row[i]);
    }
    os << "\n";
  }
}

}  // namespace

Value number(double x) {
  if (std::isnan(x)) return std::string("nan");
  if (std::isinf(x)) return std::string(x > 0 ? "inf" : "-inf");
  return std::stod(format_double(x));
}

Value text(std::string s) { return s; }

std::string format_value(const Value& v) {
  if (const double* x = std::get_if<double>(&v)) return format_double(*x);
  return std::get<std::string>(v);
}

void Table::add_row(std::vector<Value> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match table " + name);
  }
  rows.push_back(std::move(row));
}

void Report::set(const std::string& key, Value v) {
  for (auto& [k, existing] : fields) {
    if (k == key) {
      existing = std::move(v);
      return;
    }
  }
  fields.emplace_back(key, std::move(v));
}

const Value& Report::get(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw std::out_of_range("report has no field " + key);
}

const Table& Report::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("report has no table " + name);
}

Table& Report::add_table(std::string name, std::vector<std::string> columns) {
  tables.push_back(Table{std::move(name), std::move(columns), {}});
  return tables.back();
}

std::string to_json(const Report& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = report.command;
  Json fields = Json::object();
  for (const auto& [k, v] : report.fields) fields[k] = value_to_json(v);
  j["fields"] = fields;
  Json tables = Json::array();
  for (const auto& t : report.tables) {
    Json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      Json r = Json::array();
      for (const auto& v : row) r.push_back(value_to_json(v));
      rows.push_back(r);
    }
    jt["rows"] = rows;
    tables.push_back(jt);
  }
  j["tables"] = tables;
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& json) {
  const Json j = Json::parse(json);
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("unsupported report schema version");
  }
  Report report;
  report.command = j.at("command").get<std::string>();
  for (const auto& [k, v] : j.at("fields").items()) {
    report.fields.emplace_back(k, value_from_json(v));
  }
  for (const auto& jt : j.at("tables")) {
    Table t;
    t.name = jt.at("name").get<std::string>();
    t.columns = jt.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : jt.at("rows")) {
      std::vector<Value> row;
      for (const auto& v : jr) row.push_back(value_from_json(v));
      t.rows.push_back(std::move(row));
    }
    report.tables.push_back(std::move(t));
  }
  return report;
}

std::string to_csv(const Report& report) {
  std::ostringstream os;
  os << "# schema_version=" << kSchemaVersion << " command=" << report.command
     << "\n";
  for (const auto& [k, v] : report.fields) {
    os << "# " << k << "=" << format_value(v) << "\n";
  }
  for (const auto& t : report.tables) {
    if (report.tables.size() > 1) os << "# table=" << t.name << "\n";
    write_table_body(t, os);
  }
  return os.str();
}

std::string table_to_csv(const Table& table) {
  std::ostringstream os;
  os << "# schema_version=" << kSchemaVersion << " table=" << table.name << "\n";
  write_table_body(table, os);
  return os.str();
}

std::string to_text_table(const Report& report) {
  std::ostringstream os;
  size_t key_width = 0;
  for (const auto& [k, v] : report.fields) key_width = std::max(key_width, k.size());
  for (const auto& [k, v] : report.fields) {
    os << k << std::string(key_width - k.size() + 2, ' ') << format_value(v)
       << "\n";
  }
  for (const auto& t : report.tables) {
    std::vector<size_t> width(t.columns.size());
    for (size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
    for (const auto& row : t.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        width[i] = std::max(width[i], format_value(row[i]).size());
      }
    }
    os << "\n[" << t.name << "]\n";
    auto emit = [&](const std::vector<std::string>& cells) {
      for (size_t i = 0; i < cells.size(); ++i) {
        os << (i ? "  " : "") << std::string(width[i] - cells[i].size(), ' ')
           << cells[i];
      }
      os << "\n";
    };
    emit(t.columns);
    for (const auto& row : t.rows) {
      std::vector<std::string> cells;
      for (const auto& v : row) cells.push_back(format_value(v));
      emit(cells);
    }
  }
  return os.str();
}

std::string render(const Report& report, OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson:
      return to_json(report);
    case OutputFormat::kCsv:
      return to_csv(report);
    case OutputFormat::kTable:
      return to_text_table(report);
  }
  return {};
}

}  // namespace gradnoise::cli
