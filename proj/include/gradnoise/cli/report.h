#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace gradnoise::cli {

inline constexpr int kSchemaVersion = 1;

/// A report cell. Doubles are stored rounded to 12 significant digits and
/// non-finite values are stored as the strings "inf", "-inf" or "nan", so a
/// serialized report parses back to an identical value.
using Value = std::variant<double, std::string>;

Value number(double x);
Value text(std::string s);

/// Formats a value as it appears in every output format.
std::string format_value(const Value& v);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  void add_row(std::vector<Value> row);
  bool operator==(const Table&) const = default;
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, Value>> fields;
  std::vector<Table> tables;

  void set(const std::string& key, Value v);
  /// Throws std::out_of_range when the key is absent.
  const Value& get(const std::string& key) const;
  const Table& table(const std::string& name) const;
  Table& add_table(std::string name, std::vector<std::string> columns);
  bool operator==(const Report&) const = default;
};

enum class OutputFormat { kTable, kCsv, kJson };

std::string to_json(const Report& report);
Report report_from_json(const std::string& json);

/// A schema-version line, one comment line per scalar field, then each table
/// as a header plus rows. Multiple tables are preceded by "# table=<name>".
std::string to_csv(const Report& report);

/// Single-table CSV with the schema-version line.
std::string table_to_csv(const Table& table);

std::string to_text_table(const Report& report);

std::string render(const Report& report, OutputFormat format);

}  // namespace gradnoise::cli
