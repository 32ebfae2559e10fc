#include "runlens/table.hpp"

#include "runlens/core.hpp"

#include <charconv>
#include <cmath>

namespace runlens {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error("cannot format a non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

json cell_to_json(const Cell& c) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(bool b) const { return b; }
    json operator()(std::int64_t i) const { return i; }
    json operator()(double d) const { return d; }
    json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

namespace {

void append_field(std::string& out, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    out += s;
    return;
  }
  out += '"';
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
}

} // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out += ',';
    append_field(out, columns[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      append_field(out, format_cell(row[i]));
    }
    out += '\n';
  }
  return out;
}

json Table::row_json(std::size_t r) const {
  json obj = json::object();
  for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = cell_to_json(rows[r][i]);
  return obj;
}

json Table::to_json() const {
  json arr = json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) arr.push_back(row_json(r));
  return arr;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

CsvReader::CsvReader(std::string_view text, std::string name) : name_(std::move(name)) {
  auto all = parse_csv(text);
  if (all.empty()) throw ValidationError(name_ + ": missing header");
  header_ = std::move(all.front());
  rows_.assign(std::make_move_iterator(all.begin() + 1), std::make_move_iterator(all.end()));
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != header_.size()) {
      throw ValidationError(name_ + ": row " + std::to_string(r + 2) + " has " + std::to_string(rows_[r].size()) +
                            " fields, expected " + std::to_string(header_.size()));
    }
  }
}

std::size_t CsvReader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw ValidationError(name_ + ": missing column " + std::string(name));
}

const std::string& CsvReader::get(std::size_t row, std::string_view col) const { return rows_.at(row)[column(col)]; }

double CsvReader::number(std::size_t row, std::string_view col) const {
  const auto v = opt_number(row, col);
  if (!v) throw ValidationError(name_ + ": empty " + std::string(col) + " at row " + std::to_string(row + 2));
  return *v;
}

std::optional<double> CsvReader::opt_number(std::size_t row, std::string_view col) const {
  const std::string& s = get(row, col);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(name_ + ": bad number '" + s + "' in " + std::string(col));
  }
  return v;
}

std::int64_t CsvReader::integer(std::size_t row, std::string_view col) const {
  const std::string& s = get(row, col);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(name_ + ": bad integer '" + s + "' in " + std::string(col));
  }
  return v;
}

bool CsvReader::flag(std::size_t row, std::string_view col) const {
  const std::string& s = get(row, col);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValidationError(name_ + ": bad flag '" + s + "' in " + std::string(col));
}

} // namespace runlens
