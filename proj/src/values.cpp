#include "schemagate/values.hpp"

#include <algorithm>
#include <cctype>

namespace schemagate {

bool value_conforms(const Json& value, const SemanticType& type) {
  switch (type.kind()) {
    case TypeKind::kString:
    case TypeKind::kModelRef:
    case TypeKind::kDatasetRef:
      return value.is_string();
    case TypeKind::kInteger:
      return value.is_number_integer();
    case TypeKind::kNumber:
      return value.is_number();
    case TypeKind::kBoolean:
      return value.is_boolean();
    case TypeKind::kList:
      return value.is_array() && std::all_of(value.begin(), value.end(), [&](const Json& item) {
               return value_conforms(item, *type.element());
             });
    case TypeKind::kDict:
      if (!value.is_object()) return false;
      if (type.keys().empty()) return true;
      return std::all_of(value.items().begin(), value.items().end(), [&](const auto& item) {
        return std::find(type.keys().begin(), type.keys().end(), item.key()) != type.keys().end();
      });
    case TypeKind::kDataFrame: {
      if (!value.is_object() || !value.contains("columns") || !value["columns"].is_array()) return false;
      std::set<std::string> present;
      for (const auto& c : value["columns"]) {
        if (!c.is_string()) return false;
        present.insert(c.get<std::string>());
      }
      return std::includes(present.begin(), present.end(), type.columns().begin(), type.columns().end());
    }
  }
  return false;
}

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool is_empty_value(const Json& value) {
  if (value.is_string()) return is_blank(value.get_ref<const std::string&>());
  if (value.is_array() || value.is_object()) return value.empty();
  return false;
}

// Numbers subject to min/max: the value itself, list members, and for dicts
// the entry values or the numbers inside per-key bound objects.
void numeric_leaves(const Json& value, std::vector<std::pair<std::string, double>>& out, const std::string& path) {
  if (value.is_number()) {
    out.emplace_back(path, value.get<double>());
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      numeric_leaves(value[i], out, path + "[" + std::to_string(i) + "]");
    }
  } else if (value.is_object()) {
    for (const auto& item : value.items()) numeric_leaves(item.value(), out, path + "." + item.key());
  }
}

std::string short_dump(const Json& value) { return value.dump(); }

}  // namespace

Diagnostics validate_value(const Json& value, const ParameterDefinition& param, const std::string& location) {
  const std::string where = location.empty() ? param.name : location;
  Diagnostics out;
  const bool required =
      param.required || std::any_of(param.rules.begin(), param.rules.end(), [](const ValidationRule& r) {
        return r.kind == RuleKind::kRequired && r.payload != Json(false);
      });
  if (value.is_null()) {
    if (required) out.push_back(error_at(checks::kRequired, where, "required parameter '" + param.name + "' is missing"));
    return out;
  }
  if (!value_conforms(value, param.type)) {
    out.push_back(error_at(checks::kTypeMismatch, where,
                           "expected " + param.type.render() + ", got " + short_dump(value)));
    return out;
  }
  if (param.allowed_values) {
    const auto& allowed = *param.allowed_values;
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
      std::string options;
      for (const auto& a : allowed) options += (options.empty() ? "" : ", ") + short_dump(a);
      out.push_back(error_at(checks::kAllowedValues, where,
                             short_dump(value) + " is not one of the allowed values: " + options));
    }
  }
  for (const auto& rule : param.rules) {
    switch (rule.kind) {
      case RuleKind::kNotEmpty:
        if (rule.payload != Json(false) && is_empty_value(value)) {
          out.push_back(error_at(checks::kNotEmpty, where, "'" + param.name + "' must not be empty"));
        }
        break;
      case RuleKind::kMin:
      case RuleKind::kMax: {
        if (!rule.payload.is_number()) break;
        const double bound = rule.payload.get<double>();
        const bool is_min = rule.kind == RuleKind::kMin;
        std::vector<std::pair<std::string, double>> leaves;
        numeric_leaves(value, leaves, where);
        for (const auto& [path, number] : leaves) {
          if (is_min ? number < bound : number > bound) {
            out.push_back(error_at(is_min ? checks::kMin : checks::kMax, path,
                                   Json(number).dump() + (is_min ? " is below the minimum " : " exceeds the maximum ") +
                                       rule.payload.dump()));
          }
        }
        break;
      }
      case RuleKind::kRequired:
        break;
    }
  }
  return out;
}

std::string describe_expectation(const ParameterDefinition& param) {
  std::string text = param.type.render();
  if (param.allowed_values) {
    text += "; allowed: ";
    bool first = true;
    for (const auto& a : *param.allowed_values) {
      if (!first) text += ", ";
      text += a.is_string() ? a.get<std::string>() : a.dump();
      first = false;
    }
  }
  for (const auto& rule : param.rules) {
    switch (rule.kind) {
      case RuleKind::kNotEmpty: text += "; not empty"; break;
      case RuleKind::kMin: text += "; min " + rule.payload.dump(); break;
      case RuleKind::kMax: text += "; max " + rule.payload.dump(); break;
      case RuleKind::kRequired: break;
    }
  }
  if (param.required) text += "; required";
  return text;
}

}  // namespace schemagate
