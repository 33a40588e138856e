#include "schemagate/definitions.hpp"

#include <algorithm>
#include <cctype>

#include "schemagate/document.hpp"

namespace schemagate {

std::string render_document(const Json& doc) { return doc.dump(2) + "\n"; }

std::string_view rule_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::kNotEmpty: return "not_empty";
    case RuleKind::kMin: return "min";
    case RuleKind::kMax: return "max";
    case RuleKind::kRequired: return "required";
  }
  return "unknown";
}

const ParameterDefinition* find_parameter(const ParameterSchema& schema, std::string_view name) {
  auto it = std::find_if(schema.begin(), schema.end(), [&](const ParameterDefinition& p) { return p.name == name; });
  return it == schema.end() ? nullptr : &*it;
}

namespace {
const Slot* find_slot(const std::vector<Slot>& slots, std::string_view name) {
  auto it = std::find_if(slots.begin(), slots.end(), [&](const Slot& s) { return s.name == name; });
  return it == slots.end() ? nullptr : &*it;
}
}  // namespace

const Slot* IOContract::input(std::string_view name) const { return find_slot(inputs, name); }
const Slot* IOContract::output(std::string_view name) const { return find_slot(outputs, name); }

const StepDefinition* WorkflowDefinition::step(std::string_view step_id) const {
  auto it = std::find_if(steps.begin(), steps.end(), [&](const StepDefinition& s) { return s.step_id == step_id; });
  return it == steps.end() ? nullptr : &*it;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  const auto head = static_cast<unsigned char>(text.front());
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::optional<std::string> workflow_reference(const Json& literal) {
  if (!literal.is_string()) return std::nullopt;
  const auto& text = literal.get_ref<const std::string&>();
  if (text.size() < 4 || text.rfind("${", 0) != 0 || text.back() != '}') return std::nullopt;
  std::string name = text.substr(2, text.size() - 3);
  if (!is_identifier(name)) return std::nullopt;
  return name;
}

}  // namespace schemagate
