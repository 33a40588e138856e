#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "schemagate/document.hpp"

namespace schemagate {

enum class ColumnKind { kString, kNumber, kBoolean };

std::string_view column_kind_name(ColumnKind kind);

/// monostate marks a missing value.
using Cell = std::variant<std::monostate, std::string, double, bool>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kString;
  std::vector<Cell> cells;

  bool operator==(const Column&) const = default;
};

/// In-memory, column-ordered table. Column kinds are inferred from CSV text:
/// number if every present cell parses as a number, boolean if every present
/// cell is true/false, string otherwise. Empty cells are missing.
class DataFrame {
 public:
  DataFrame() = default;
  explicit DataFrame(std::vector<Column> columns);

  static DataFrame parse_csv(std::istream& in);
  static DataFrame read_csv(const std::filesystem::path& path);

  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().cells.size(); }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::vector<Column>& columns() noexcept { return columns_; }
  const Column* column(std::string_view name) const;
  std::vector<std::string> column_names() const;

  bool row_has_missing(std::size_t row) const;
  bool rows_equal(std::size_t a, std::size_t b) const;
  DataFrame select_rows(const std::vector<std::size_t>& rows) const;

  /// Deterministic CSV rendering (shortest round-trip number spelling).
  std::string to_csv() const;

  bool operator==(const DataFrame&) const = default;

 private:
  std::vector<Column> columns_;
};

std::string format_number(double value);

}  // namespace schemagate
