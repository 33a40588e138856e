#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace schemagate {

enum class TypeKind {
  kString,
  kNumber,
  kInteger,
  kBoolean,
  kList,
  kDict,
  kDataFrame,
  kModelRef,
  kDatasetRef,
};

std::string_view kind_name(TypeKind kind);

/// A value type from the closed domain grammar
///
///   base | list[base] | dict | dataframe | dataframe{col,...}
///
/// with base in {string, number, integer, boolean, model-ref, dataset-ref}
/// and the aliases str, int, float, bool. Immutable once built.
class SemanticType {
 public:
  SemanticType() = default;

  static SemanticType string() { return SemanticType(TypeKind::kString); }
  static SemanticType number() { return SemanticType(TypeKind::kNumber); }
  static SemanticType integer() { return SemanticType(TypeKind::kInteger); }
  static SemanticType boolean() { return SemanticType(TypeKind::kBoolean); }
  static SemanticType model_ref() { return SemanticType(TypeKind::kModelRef); }
  static SemanticType dataset_ref() { return SemanticType(TypeKind::kDatasetRef); }
  static SemanticType list(SemanticType element);
  static SemanticType dict(std::vector<std::string> keys = {});
  /// Dataframe whose columns are unchecked ("dynamic").
  static SemanticType dataframe();
  /// Dataframe with a declared, non-empty column set.
  static SemanticType dataframe(std::set<std::string> columns);

  TypeKind kind() const noexcept { return kind_; }
  /// Element type of a list; nullptr for every other kind.
  const SemanticType* element() const noexcept { return element_.get(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  bool dynamic_columns() const noexcept { return !columns_.has_value(); }
  /// Declared columns; empty for dynamic dataframes and non-dataframes.
  const std::set<std::string>& columns() const noexcept;

  /// Type expression in canonical spelling (aliases normalised).
  std::string render() const;

  bool operator==(const SemanticType& other) const;

 private:
  explicit SemanticType(TypeKind kind) : kind_(kind) {}

  TypeKind kind_ = TypeKind::kString;
  std::shared_ptr<const SemanticType> element_;
  std::vector<std::string> keys_;
  std::optional<std::set<std::string>> columns_;
};

/// Throws TypeSyntaxError naming the offending token and its offset.
SemanticType parse_semantic_type(std::string_view text);

/// True iff a value of `source` may flow into a slot typed `target`.
bool types_compatible(const SemanticType& source, const SemanticType& target);

/// Columns `target` declares that `source` does not provide. Empty when
/// either side is dynamic or either is not a dataframe.
std::set<std::string> missing_columns(const SemanticType& source, const SemanticType& target);

}  // namespace schemagate
