#include "schemagate/semantic_type.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "schemagate/error.hpp"

namespace schemagate {

std::string_view kind_name(TypeKind kind) {
  switch (kind) {
    case TypeKind::kString: return "string";
    case TypeKind::kNumber: return "number";
    case TypeKind::kInteger: return "integer";
    case TypeKind::kBoolean: return "boolean";
    case TypeKind::kList: return "list";
    case TypeKind::kDict: return "dict";
    case TypeKind::kDataFrame: return "dataframe";
    case TypeKind::kModelRef: return "model-ref";
    case TypeKind::kDatasetRef: return "dataset-ref";
  }
  return "unknown";
}

SemanticType SemanticType::list(SemanticType element) {
  SemanticType t(TypeKind::kList);
  t.element_ = std::make_shared<const SemanticType>(std::move(element));
  return t;
}

SemanticType SemanticType::dict(std::vector<std::string> keys) {
  SemanticType t(TypeKind::kDict);
  t.keys_ = std::move(keys);
  return t;
}

SemanticType SemanticType::dataframe() { return SemanticType(TypeKind::kDataFrame); }

SemanticType SemanticType::dataframe(std::set<std::string> columns) {
  if (columns.empty()) throw TypeSyntaxError("{}", 0, "declared dataframe column set must be non-empty");
  SemanticType t(TypeKind::kDataFrame);
  t.columns_ = std::move(columns);
  return t;
}

const std::set<std::string>& SemanticType::columns() const noexcept {
  static const std::set<std::string> kEmpty;
  return columns_ ? *columns_ : kEmpty;
}

std::string SemanticType::render() const {
  switch (kind_) {
    case TypeKind::kList:
      return "list[" + element_->render() + "]";
    case TypeKind::kDataFrame: {
      if (!columns_) return "dataframe";
      std::string out = "dataframe{";
      bool first = true;
      for (const auto& c : *columns_) {
        if (!first) out += ",";
        out += c;
        first = false;
      }
      return out + "}";
    }
    default:
      return std::string(kind_name(kind_));
  }
}

bool SemanticType::operator==(const SemanticType& other) const {
  if (kind_ != other.kind_ || keys_ != other.keys_ || columns_ != other.columns_) return false;
  if (!element_ || !other.element_) return element_ == other.element_;
  return *element_ == *other.element_;
}

namespace {

const std::map<std::string, TypeKind, std::less<>>& base_kinds() {
  static const std::map<std::string, TypeKind, std::less<>> kBases = {
      {"str", TypeKind::kString},         {"string", TypeKind::kString},
      {"int", TypeKind::kInteger},        {"integer", TypeKind::kInteger},
      {"float", TypeKind::kNumber},       {"number", TypeKind::kNumber},
      {"bool", TypeKind::kBoolean},       {"boolean", TypeKind::kBoolean},
      {"model-ref", TypeKind::kModelRef}, {"dataset-ref", TypeKind::kDatasetRef},
  };
  return kBases;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_column_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class TypeParser {
 public:
  explicit TypeParser(std::string_view text) : text_(text) {}

  SemanticType parse() {
    skip_space();
    if (pos_ == text_.size()) fail("", "empty type expression");
    SemanticType result = parse_type(/*allow_composite=*/true);
    skip_space();
    if (pos_ != text_.size()) fail(std::string(text_.substr(pos_, 1)), "unexpected trailing input");
    return result;
  }

 private:
  SemanticType parse_type(bool allow_composite) {
    const std::size_t start = pos_;
    std::string word = read_word();
    if (word.empty()) {
      fail(pos_ < text_.size() ? std::string(text_.substr(pos_, 1)) : std::string{}, "expected a type name");
    }
    if (auto it = base_kinds().find(word); it != base_kinds().end()) {
      switch (it->second) {
        case TypeKind::kString: return SemanticType::string();
        case TypeKind::kInteger: return SemanticType::integer();
        case TypeKind::kNumber: return SemanticType::number();
        case TypeKind::kBoolean: return SemanticType::boolean();
        case TypeKind::kModelRef: return SemanticType::model_ref();
        default: return SemanticType::dataset_ref();
      }
    }
    if (!allow_composite) fail(word, "list elements must be base types", start);
    if (word == "list") {
      expect('[');
      skip_space();
      SemanticType element = parse_type(/*allow_composite=*/false);
      skip_space();
      expect(']');
      return SemanticType::list(std::move(element));
    }
    if (word == "dict") return SemanticType::dict();
    if (word == "dataframe") {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '{') return parse_columns();
      return SemanticType::dataframe();
    }
    fail(word, "unknown type name '" + word + "'", start);
  }

  SemanticType parse_columns() {
    expect('{');
    std::set<std::string> columns;
    for (;;) {
      skip_space();
      const std::size_t start = pos_;
      std::string column;
      while (pos_ < text_.size() && is_column_char(text_[pos_])) column += text_[pos_++];
      if (column.empty()) {
        fail(pos_ < text_.size() ? std::string(text_.substr(pos_, 1)) : std::string{}, "expected a column name");
      }
      if (!columns.insert(column).second) fail(column, "duplicate column '" + column + "'", start);
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return SemanticType::dataframe(std::move(columns));
    }
  }

  std::string read_word() {
    std::string word;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) word += text_[pos_++];
    return word;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(pos_ < text_.size() ? std::string(text_.substr(pos_, 1)) : std::string{},
           std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& token, const std::string& what) { fail(token, what, pos_); }

  [[noreturn]] void fail(const std::string& token, const std::string& what, std::size_t at) {
    throw TypeSyntaxError(token, at,
                          what + " at position " + std::to_string(at) + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SemanticType parse_semantic_type(std::string_view text) { return TypeParser(text).parse(); }

bool types_compatible(const SemanticType& source, const SemanticType& target) {
  if (source.kind() == TypeKind::kInteger && target.kind() == TypeKind::kNumber) return true;
  if (source.kind() != target.kind()) return false;
  switch (source.kind()) {
    case TypeKind::kList:
      return types_compatible(*source.element(), *target.element());
    case TypeKind::kDataFrame:
      if (source.dynamic_columns() || target.dynamic_columns()) return true;
      return std::includes(source.columns().begin(), source.columns().end(), target.columns().begin(),
                           target.columns().end());
    default:
      return true;
  }
}

std::set<std::string> missing_columns(const SemanticType& source, const SemanticType& target) {
  std::set<std::string> missing;
  if (source.kind() != TypeKind::kDataFrame || target.kind() != TypeKind::kDataFrame) return missing;
  if (source.dynamic_columns() || target.dynamic_columns()) return missing;
  std::set_difference(target.columns().begin(), target.columns().end(), source.columns().begin(),
                      source.columns().end(), std::inserter(missing, missing.end()));
  return missing;
}

}  // namespace schemagate
