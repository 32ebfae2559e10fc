#pragma once

// Typed rows shared by CSV exports, store artifacts and JSON responses, so a
// value has one textual form everywhere.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace runlens {

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

template <typename T>
Cell opt_cell(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<double>(*v);
  } else if constexpr (std::is_integral_v<T>) {
    return static_cast<std::int64_t>(*v);
  } else {
    return Cell(*v);
  }
}

/// Shortest text that parses back to the same double.
std::string format_double(double v);
std::string format_cell(const Cell& c);
nlohmann::json cell_to_json(const Cell& c);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::string to_csv() const;
  nlohmann::json row_json(std::size_t row) const;
  nlohmann::json to_json() const; // array of row objects
};

/// RFC 4180 style parsing (quoted fields may hold commas and quotes).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Header-indexed access to a parsed CSV.
class CsvReader {
public:
  explicit CsvReader(std::string_view text, std::string name = "csv");
  std::size_t size() const { return rows_.size(); }
  const std::string& get(std::size_t row, std::string_view column) const;
  double number(std::size_t row, std::string_view column) const;
  std::int64_t integer(std::size_t row, std::string_view column) const;
  std::optional<double> opt_number(std::size_t row, std::string_view column) const;
  bool flag(std::size_t row, std::string_view column) const;

private:
  std::size_t column(std::string_view name) const;
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

} // namespace runlens
