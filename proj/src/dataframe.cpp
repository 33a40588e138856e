#include "schemagate/dataframe.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "schemagate/error.hpp"

namespace schemagate {

std::string_view column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kString: return "string";
    case ColumnKind::kNumber: return "number";
    case ColumnKind::kBoolean: return "boolean";
  }
  return "string";
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, ptr);
}

DataFrame::DataFrame(std::vector<Column> columns) : columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    if (c.cells.size() != rows()) throw std::invalid_argument("dataframe columns differ in length");
  }
}

namespace {

std::vector<std::string> split_csv_record(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

DataFrame DataFrame::parse_csv(std::istream& in) {
  bool ok = false;
  auto header = split_csv_record(in, ok);
  if (!ok || header.empty() || (header.size() == 1 && trim(header[0]).empty())) {
    throw std::invalid_argument("CSV has no header row");
  }
  std::vector<std::vector<std::string>> raw(header.size());
  std::size_t line = 1;
  for (;;) {
    auto record = split_csv_record(in, ok);
    if (!ok) break;
    ++line;
    if (record.size() == 1 && trim(record[0]).empty()) continue;
    if (record.size() != header.size()) {
      throw std::invalid_argument("CSV line " + std::to_string(line) + " has " + std::to_string(record.size()) +
                                  " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < record.size(); ++i) raw[i].push_back(trim(record[i]));
  }
  std::vector<Column> columns;
  for (std::size_t i = 0; i < header.size(); ++i) {
    Column col;
    col.name = trim(header[i]);
    bool all_number = true;
    bool all_bool = true;
    for (const auto& text : raw[i]) {
      if (text.empty()) continue;
      double d;
      if (!parse_double(text, d)) all_number = false;
      if (text != "true" && text != "false") all_bool = false;
    }
    col.kind = all_number ? ColumnKind::kNumber : (all_bool ? ColumnKind::kBoolean : ColumnKind::kString);
    for (const auto& text : raw[i]) {
      if (text.empty()) {
        col.cells.emplace_back(std::monostate{});
      } else if (col.kind == ColumnKind::kNumber) {
        double d = 0;
        parse_double(text, d);
        col.cells.emplace_back(d);
      } else if (col.kind == ColumnKind::kBoolean) {
        col.cells.emplace_back(text == "true");
      } else {
        col.cells.emplace_back(text);
      }
    }
    columns.push_back(std::move(col));
  }
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (!names.insert(c.name).second) throw std::invalid_argument("duplicate CSV column '" + c.name + "'");
  }
  return DataFrame(std::move(columns));
}

DataFrame DataFrame::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open " + path.string());
  return parse_csv(in);
}

const Column* DataFrame::column(std::string_view name) const {
  auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
  return it == columns_.end() ? nullptr : &*it;
}

std::vector<std::string> DataFrame::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

bool DataFrame::row_has_missing(std::size_t row) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return is_missing(c.cells[row]); });
}

bool DataFrame::rows_equal(std::size_t a, std::size_t b) const {
  return std::all_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.cells[a] == c.cells[b]; });
}

DataFrame DataFrame::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<Column> out;
  for (const auto& c : columns_) {
    Column col{c.name, c.kind, {}};
    col.cells.reserve(rows.size());
    for (auto r : rows) col.cells.push_back(c.cells.at(r));
    out.push_back(std::move(col));
  }
  return DataFrame(std::move(out));
}

namespace {
std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string DataFrame::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << quote_csv(columns_[i].name);
  out << "\n";
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out << ",";
      const Cell& cell = columns_[i].cells[r];
      if (const auto* s = std::get_if<std::string>(&cell)) {
        out << quote_csv(*s);
      } else if (const auto* d = std::get_if<double>(&cell)) {
        out << format_number(*d);
      } else if (const auto* b = std::get_if<bool>(&cell)) {
        out << (*b ? "true" : "false");
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace schemagate
