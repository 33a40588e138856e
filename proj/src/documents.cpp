#include "schemagate/documents.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <set>

#include "schemagate/error.hpp"
#include "schemagate/values.hpp"

namespace schemagate {

namespace {

std::string join_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

std::string index_path(const std::string& base, std::size_t index) {
  return base + "[" + std::to_string(index) + "]";
}

std::string_view json_kind(const Json& value) {
  switch (value.type()) {
    case Json::value_t::null: return "null";
    case Json::value_t::object: return "object";
    case Json::value_t::array: return "array";
    case Json::value_t::string: return "string";
    case Json::value_t::boolean: return "boolean";
    case Json::value_t::binary: return "binary";
    case Json::value_t::discarded: return "discarded";
    default: return "number";
  }
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Walks one object of a closed schema, recording a diagnostic for every
// unknown key, missing required key, and mistyped value.
class ObjectReader {
 public:
  ObjectReader(const Json& value, std::string location, Diagnostics& diags,
               std::initializer_list<std::string_view> allowed)
      : value_(value), location_(std::move(location)), diags_(diags) {
    if (!value.is_object()) {
      structure(location_.empty() ? "<root>" : location_, "expected an object, got " + std::string(json_kind(value)));
      valid_ = false;
      return;
    }
    for (const auto& item : value.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        structure(join_path(location_, item.key()), "unknown field '" + item.key() + "'");
      }
    }
  }

  bool valid() const noexcept { return valid_; }
  std::string path(std::string_view key) const { return join_path(location_, key); }

  const Json* field(std::string_view key, bool required) {
    if (!valid_) return nullptr;
    auto it = value_.find(std::string(key));
    if (it == value_.end()) {
      if (required) structure(path(key), "missing required field '" + std::string(key) + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string(std::string_view key, bool required) {
    const Json* v = field(key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) return mistyped(key, "string", *v), std::nullopt;
    return v->get<std::string>();
  }

  std::optional<bool> boolean(std::string_view key, bool required) {
    const Json* v = field(key, required);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) return mistyped(key, "boolean", *v), std::nullopt;
    return v->get<bool>();
  }

  std::optional<double> number(std::string_view key, bool required) {
    const Json* v = field(key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) return mistyped(key, "number", *v), std::nullopt;
    return v->get<double>();
  }

  const Json* array(std::string_view key, bool required) {
    const Json* v = field(key, required);
    if (!v) return nullptr;
    if (!v->is_array()) return mistyped(key, "array", *v), nullptr;
    return v;
  }

  const Json* object(std::string_view key, bool required) {
    const Json* v = field(key, required);
    if (!v) return nullptr;
    if (!v->is_object()) return mistyped(key, "object", *v), nullptr;
    return v;
  }

  std::vector<std::string> string_list(std::string_view key, bool required) {
    std::vector<std::string> out;
    const Json* v = array(key, required);
    if (!v) return out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& item = (*v)[i];
      if (!item.is_string()) {
        structure(index_path(path(key), i), "expected a string, got " + std::string(json_kind(item)));
        continue;
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  }

 private:
  void mistyped(std::string_view key, std::string_view expected, const Json& got) {
    structure(path(key), "expected " + std::string(expected) + ", got " + std::string(json_kind(got)));
  }

  void structure(std::string location, std::string message) {
    diags_.push_back(error_at(checks::kSchemaStructure, std::move(location), std::move(message)));
  }

  const Json& value_;
  std::string location_;
  Diagnostics& diags_;
  bool valid_ = true;
};

std::optional<SemanticType> decode_type_expr(const std::string& text, const std::string& location,
                                             Diagnostics& diags) {
  try {
    return parse_semantic_type(text);
  } catch (const TypeSyntaxError& e) {
    diags.push_back(error_at(checks::kTypeSyntax, location, e.what()));
    return std::nullopt;
  }
}

std::optional<SemVer> decode_version(const std::optional<std::string>& text, const std::string& location,
                                     Diagnostics& diags) {
  if (!text) return std::nullopt;
  auto version = SemVer::parse(*text);
  if (!version) {
    diags.push_back(error_at(checks::kVersionFormat, location,
                             "'" + *text + "' is not a semantic version (major.minor.patch)"));
  }
  return version;
}

// Slot entry: {"type": expr, "columns": "dynamic" | [names], "keys": [names]}
std::optional<SemanticType> decode_slot_type(const Json& entry, const std::string& location, Diagnostics& diags) {
  const std::size_t before = diags.size();
  ObjectReader reader(entry, location, diags, {"type", "columns", "keys"});
  if (!reader.valid()) return std::nullopt;
  auto expr = reader.string("type", true);
  const Json* columns = reader.field("columns", false);
  std::vector<std::string> keys = reader.string_list("keys", false);
  if (!expr) return std::nullopt;
  auto type = decode_type_expr(*expr, reader.path("type"), diags);
  if (!type) return std::nullopt;
  if (columns) {
    if (type->kind() != TypeKind::kDataFrame) {
      diags.push_back(error_at(checks::kSchemaStructure, reader.path("columns"), "'columns' applies to dataframe only"));
    } else if (!type->dynamic_columns()) {
      diags.push_back(error_at(checks::kSchemaStructure, reader.path("columns"),
                               "columns declared both in the type expression and in 'columns'"));
    } else if (columns->is_string()) {
      if (columns->get<std::string>() != "dynamic") {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path("columns"),
                                 "'columns' must be \"dynamic\" or a list of column names"));
      }
    } else if (columns->is_array()) {
      std::set<std::string> names;
      bool ok = !columns->empty();
      for (const auto& c : *columns) {
        if (!c.is_string() || !names.insert(c.get<std::string>()).second) ok = false;
      }
      if (!ok) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path("columns"),
                                 "'columns' must be a non-empty list of distinct names"));
      } else {
        type = SemanticType::dataframe(std::move(names));
      }
    } else {
      diags.push_back(error_at(checks::kSchemaStructure, reader.path("columns"),
                               "'columns' must be \"dynamic\" or a list of column names"));
    }
  }
  if (reader.field("keys", false)) {
    if (type->kind() != TypeKind::kDict) {
      diags.push_back(error_at(checks::kSchemaStructure, reader.path("keys"), "'keys' applies to dict only"));
    } else {
      std::set<std::string> distinct(keys.begin(), keys.end());
      if (distinct.size() != keys.size()) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path("keys"), "dict keys must be distinct"));
      }
      type = SemanticType::dict(keys);
    }
  }
  if (diags.size() != before) return std::nullopt;
  return type;
}

std::vector<Slot> decode_slots(const Json* map, const std::string& location, Diagnostics& diags) {
  std::vector<Slot> slots;
  if (!map) return slots;
  for (const auto& item : map->items()) {
    auto type = decode_slot_type(item.value(), join_path(location, item.key()), diags);
    if (type) slots.push_back(Slot{item.key(), std::move(*type)});
  }
  return slots;
}

void decode_rules(const Json& rules, const std::string& location, ParameterDefinition& param, Diagnostics& diags) {
  ObjectReader reader(rules, location, diags, {"not_empty", "allowed_values", "min", "max", "required"});
  if (!reader.valid()) return;
  for (const auto& item : rules.items()) {
    const std::string& key = item.key();
    const Json& payload = item.value();
    if (key == "not_empty" || key == "required") {
      if (!payload.is_boolean()) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path(key), "expected boolean"));
        continue;
      }
      param.rules.push_back(ValidationRule{key == "not_empty" ? RuleKind::kNotEmpty : RuleKind::kRequired, payload});
    } else if (key == "min" || key == "max") {
      if (!payload.is_number()) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path(key), "expected number"));
        continue;
      }
      param.rules.push_back(ValidationRule{key == "min" ? RuleKind::kMin : RuleKind::kMax, payload});
    } else if (key == "allowed_values") {
      if (!payload.is_array()) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path(key), "expected array"));
        continue;
      }
      param.allowed_values = std::vector<Json>(payload.begin(), payload.end());
    }
  }
}

enum class ParamStyle { kTool, kWorkflow };

std::optional<ParameterDefinition> decode_parameter(const Json& entry, const std::string& location, ParamStyle style,
                                                    const std::string& map_key, Diagnostics& diags) {
  const std::size_t before = diags.size();
  ParameterDefinition param;
  if (style == ParamStyle::kTool) {
    ObjectReader reader(entry, location, diags,
                        {"name", "type", "description", "required", "default", "allowed_values", "examples",
                         "validation_rules"});
    if (!reader.valid()) return std::nullopt;
    param.name = reader.string("name", true).value_or("");
    if (auto t = reader.string("type", true)) {
      if (auto type = decode_type_expr(*t, reader.path("type"), diags)) param.type = std::move(*type);
    }
    param.description = reader.string("description", false).value_or("");
    param.required = reader.boolean("required", false).value_or(false);
    if (const Json* d = reader.field("default", false)) param.default_value = *d;
    if (const Json* a = reader.array("allowed_values", false)) param.allowed_values = std::vector<Json>(a->begin(), a->end());
    if (const Json* e = reader.array("examples", false)) param.examples.assign(e->begin(), e->end());
    if (const Json* r = reader.field("validation_rules", false)) {
      std::optional<std::vector<Json>> top = param.allowed_values;
      decode_rules(*r, reader.path("validation_rules"), param, diags);
      if (top && param.allowed_values != top) {
        diags.push_back(error_at(checks::kSchemaStructure, reader.path("validation_rules.allowed_values"),
                                 "allowed_values given twice"));
      }
    }
  } else {
    ObjectReader reader(entry, location, diags,
                        {"type", "required", "default", "description", "validation_rules", "examples"});
    if (!reader.valid()) return std::nullopt;
    param.name = map_key;
    if (auto t = reader.string("type", true)) {
      if (auto type = decode_type_expr(*t, reader.path("type"), diags)) param.type = std::move(*type);
    }
    param.required = reader.boolean("required", false).value_or(false);
    if (const Json* d = reader.field("default", false)) param.default_value = *d;
    param.description = reader.string("description", false).value_or("");
    if (const Json* r = reader.field("validation_rules", false)) decode_rules(*r, reader.path("validation_rules"), param, diags);
    if (const Json* e = reader.array("examples", false)) param.examples.assign(e->begin(), e->end());
  }
  if (diags.size() != before) return std::nullopt;
  return param;
}

// Coherence of one parameter definition: default/examples/allowed_values
// against the type, required-vs-default, default membership.
void check_parameter_coherence(const ParameterDefinition& p, const std::string& loc, Diagnostics& out) {
  auto consistency = [&](std::string where, std::string message) {
    out.push_back(error_at(checks::kParameterConsistency, std::move(where), std::move(message)));
  };
  if (p.required && p.default_value) {
    consistency(join_path(loc, "default"), "required parameter '" + p.name + "' must not declare a default");
  }
  if (p.allowed_values) {
    const auto& allowed = *p.allowed_values;
    if (allowed.empty()) consistency(join_path(loc, "allowed_values"), "allowed_values must not be empty");
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      if (!value_conforms(allowed[i], p.type)) {
        consistency(index_path(join_path(loc, "allowed_values"), i),
                    allowed[i].dump() + " does not type-check as " + p.type.render());
      }
      if (std::find(allowed.begin(), allowed.begin() + static_cast<std::ptrdiff_t>(i), allowed[i]) !=
          allowed.begin() + static_cast<std::ptrdiff_t>(i)) {
        consistency(index_path(join_path(loc, "allowed_values"), i), "duplicate allowed value " + allowed[i].dump());
      }
    }
  }
  if (p.default_value) {
    ParameterDefinition relaxed = p;
    relaxed.required = false;
    for (const auto& d : validate_value(*p.default_value, relaxed, join_path(loc, "default"))) {
      consistency(d.location, "default " + p.default_value->dump() + " is inconsistent: " + d.message);
    }
  }
  for (std::size_t i = 0; i < p.examples.size(); ++i) {
    if (!value_conforms(p.examples[i], p.type)) {
      consistency(index_path(join_path(loc, "examples"), i),
                  "example " + p.examples[i].dump() + " does not type-check as " + p.type.render());
    }
  }
  for (const auto& rule : p.rules) {
    if ((rule.kind == RuleKind::kMin || rule.kind == RuleKind::kMax) &&
        !(p.type.kind() == TypeKind::kNumber || p.type.kind() == TypeKind::kInteger ||
          p.type.kind() == TypeKind::kList || p.type.kind() == TypeKind::kDict)) {
      consistency(join_path(loc, "validation_rules"),
                  std::string(rule_name(rule.kind)) + " does not apply to " + p.type.render());
    }
  }
}

template <typename T>
ParseResult<T> finish(std::optional<T> value, Diagnostics diags) {
  if (has_errors(diags) || !value) {
    if (diags.empty()) diags.push_back(error_at(checks::kSchemaStructure, "", "document could not be decoded"));
    return diags;
  }
  return std::move(*value);
}

Json parse_text(const std::string& text, Diagnostics& diags) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    diags.push_back(error_at(checks::kSchemaStructure, "", std::string("malformed JSON: ") + e.what()));
    return Json();
  }
}

}  // namespace

ToolDecode decode_tool_definition(const Json& document) {
  ToolDecode result;
  auto& diags = result.diagnostics;
  ObjectReader reader(document, "", diags,
                      {"id", "name", "description", "version", "parameters", "input_schema", "output_schema",
                       "dependencies", "domain_tags", "provenance", "estimated_duration", "requires_network"});
  if (!reader.valid()) return result;
  ToolDefinition tool;
  tool.id = reader.string("id", true).value_or("");
  tool.name = reader.string("name", true).value_or("");
  tool.description = reader.string("description", false).value_or("");
  auto version = decode_version(reader.string("version", true), "version", diags);
  if (version) tool.version = *version;
  if (const Json* params = reader.array("parameters", false)) {
    for (std::size_t i = 0; i < params->size(); ++i) {
      auto p = decode_parameter((*params)[i], index_path("parameters", i), ParamStyle::kTool, "", diags);
      if (p) tool.parameters.push_back(std::move(*p));
    }
  }
  tool.io.inputs = decode_slots(reader.object("input_schema", false), "input_schema", diags);
  tool.io.outputs = decode_slots(reader.object("output_schema", false), "output_schema", diags);
  tool.dependencies = reader.string_list("dependencies", false);
  tool.domain_tags = reader.string_list("domain_tags", false);
  if (const Json* prov = reader.field("provenance", false)) {
    ObjectReader pr(*prov, "provenance", diags, {"origin", "maintainer"});
    if (pr.valid()) {
      tool.provenance.origin = pr.string("origin", false).value_or("");
      tool.provenance.maintainer = pr.string("maintainer", false).value_or("");
    }
  }
  tool.estimated_duration = reader.number("estimated_duration", false).value_or(0.0);
  tool.requires_network = reader.boolean("requires_network", false).value_or(false);
  if (!has_errors(diags)) result.tool = std::move(tool);
  return result;
}

WorkflowDecode decode_workflow_definition(const Json& document) {
  WorkflowDecode result;
  auto& diags = result.diagnostics;
  ObjectReader reader(document, "", diags,
                      {"workflow_id", "name", "description", "version", "steps", "parameter_mappings", "edges",
                       "parameters", "metadata"});
  if (!reader.valid()) return result;
  WorkflowDefinition wf;
  wf.workflow_id = reader.string("workflow_id", true).value_or("");
  wf.name = reader.string("name", false).value_or("");
  wf.description = reader.string("description", false).value_or("");
  if (reader.field("version", false)) {
    if (auto v = decode_version(reader.string("version", false), "version", diags)) wf.version = *v;
  }
  if (const Json* steps = reader.array("steps", true)) {
    for (std::size_t i = 0; i < steps->size(); ++i) {
      ObjectReader sr((*steps)[i], index_path("steps", i), diags,
                      {"step_id", "tool_id", "name", "description", "parameters", "dependencies",
                       "estimated_duration"});
      if (!sr.valid()) continue;
      StepDefinition step;
      step.step_id = sr.string("step_id", true).value_or("");
      step.tool_id = sr.string("tool_id", true).value_or("");
      step.name = sr.string("name", false).value_or("");
      step.description = sr.string("description", false).value_or("");
      if (const Json* p = sr.object("parameters", false)) step.parameters = *p;
      step.dependencies = sr.string_list("dependencies", false);
      step.estimated_duration = sr.number("estimated_duration", false).value_or(0.0);
      wf.steps.push_back(std::move(step));
    }
  }
  if (const Json* maps = reader.array("parameter_mappings", false)) {
    for (std::size_t i = 0; i < maps->size(); ++i) {
      ObjectReader mr((*maps)[i], index_path("parameter_mappings", i), diags,
                      {"from_step", "from_parameter", "to_step", "to_parameter", "description"});
      if (!mr.valid()) continue;
      ParameterMapping m;
      m.from_step = mr.string("from_step", true).value_or("");
      m.from_parameter = mr.string("from_parameter", true).value_or("");
      m.to_step = mr.string("to_step", true).value_or("");
      m.to_parameter = mr.string("to_parameter", true).value_or("");
      m.description = mr.string("description", false).value_or("");
      wf.parameter_mappings.push_back(std::move(m));
    }
  }
  if (const Json* edges = reader.array("edges", false)) {
    for (std::size_t i = 0; i < edges->size(); ++i) {
      ObjectReader er((*edges)[i], index_path("edges", i), diags,
                      {"edge_id", "source_node_id", "target_node_id", "source_output", "target_input"});
      if (!er.valid()) continue;
      EdgeDefinition e;
      e.edge_id = er.string("edge_id", true).value_or("");
      e.source_node_id = er.string("source_node_id", true).value_or("");
      e.target_node_id = er.string("target_node_id", true).value_or("");
      e.source_output = er.string("source_output", true).value_or("");
      e.target_input = er.string("target_input", true).value_or("");
      wf.edges.push_back(std::move(e));
    }
  }
  if (const Json* params = reader.object("parameters", false)) {
    auto schema = parse_parameter_schema(*params, "parameters");
    if (schema) {
      wf.parameters = std::move(schema).value();
    } else {
      diags.insert(diags.end(), schema.diagnostics().begin(), schema.diagnostics().end());
    }
  }
  if (const Json* meta = reader.field("metadata", false)) {
    ObjectReader mr(*meta, "metadata", diags,
                    {"complexity", "estimated_duration_minutes", "tags", "categories", "use_cases"});
    if (mr.valid()) {
      wf.metadata.complexity = mr.string("complexity", false);
      wf.metadata.estimated_duration_minutes = mr.number("estimated_duration_minutes", false);
      wf.metadata.tags = mr.string_list("tags", false);
      wf.metadata.categories = mr.string_list("categories", false);
      wf.metadata.use_cases = mr.string_list("use_cases", false);
    }
  }
  if (!has_errors(diags)) result.workflow = std::move(wf);
  return result;
}

ParseResult<ParameterSchema> parse_parameter_schema(const Json& document, const std::string& location) {
  Diagnostics diags;
  ParameterSchema schema;
  if (!document.is_object()) {
    diags.push_back(error_at(checks::kSchemaStructure, location, "expected an object"));
    return diags;
  }
  for (const auto& item : document.items()) {
    auto p = decode_parameter(item.value(), join_path(location, item.key()), ParamStyle::kWorkflow, item.key(), diags);
    if (p) schema.push_back(std::move(*p));
  }
  if (has_errors(diags)) return diags;
  return schema;
}

Diagnostics check_tool_invariants(const ToolDefinition& tool) {
  Diagnostics out;
  if (!is_identifier(tool.id)) {
    out.push_back(error_at(checks::kIdentifierFormat, "id", "'" + tool.id + "' is not an identifier"));
  }
  if (is_blank(tool.description)) {
    out.push_back(error_at(checks::kDocumentationCompleteness, "description", "tool description is missing or empty"));
  }
  if (tool.estimated_duration < 0) {
    out.push_back(error_at(checks::kParameterConsistency, "estimated_duration", "estimated_duration must be >= 0"));
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < tool.parameters.size(); ++i) {
    const auto& p = tool.parameters[i];
    const std::string loc = index_path("parameters", i);
    if (!is_identifier(p.name)) {
      out.push_back(error_at(checks::kIdentifierFormat, join_path(loc, "name"), "'" + p.name + "' is not an identifier"));
    }
    if (!names.insert(p.name).second) {
      out.push_back(error_at(checks::kParameterConsistency, join_path(loc, "name"), "duplicate parameter '" + p.name + "'"));
    }
    if (tool.io.input(p.name)) {
      out.push_back(error_at(checks::kParameterConsistency, join_path(loc, "name"),
                             "parameter '" + p.name + "' collides with an input_schema slot"));
    }
    if (is_blank(p.description)) {
      out.push_back(error_at(checks::kDocumentationCompleteness, join_path(loc, "description"),
                             "parameter '" + p.name + "' has no description"));
    }
    if (p.required && p.examples.empty()) {
      out.push_back(error_at(checks::kDocumentationCompleteness, join_path(loc, "examples"),
                             "required parameter '" + p.name + "' has no example"));
    }
    check_parameter_coherence(p, loc, out);
  }
  for (const auto* slots : {&tool.io.inputs, &tool.io.outputs}) {
    const std::string base = slots == &tool.io.inputs ? "input_schema" : "output_schema";
    std::set<std::string> seen;
    for (const auto& slot : *slots) {
      if (!is_identifier(slot.name)) {
        out.push_back(error_at(checks::kIdentifierFormat, join_path(base, slot.name), "'" + slot.name + "' is not an identifier"));
      }
      if (!seen.insert(slot.name).second) {
        out.push_back(error_at(checks::kParameterConsistency, join_path(base, slot.name), "duplicate slot '" + slot.name + "'"));
      }
    }
  }
  std::set<std::string> deps;
  for (std::size_t i = 0; i < tool.dependencies.size(); ++i) {
    const auto& dep = tool.dependencies[i];
    const std::string loc = index_path("dependencies", i);
    if (dep == tool.id) {
      out.push_back(error_at(checks::kParameterConsistency, loc, "tool depends on itself"));
    }
    if (!deps.insert(dep).second) {
      out.push_back(error_at(checks::kParameterConsistency, loc, "duplicate dependency '" + dep + "'"));
    }
    if (!is_identifier(dep)) {
      out.push_back(error_at(checks::kIdentifierFormat, loc, "'" + dep + "' is not an identifier"));
    }
  }
  return out;
}

Diagnostics check_workflow_invariants(const WorkflowDefinition& wf) {
  Diagnostics out;
  if (!is_identifier(wf.workflow_id)) {
    out.push_back(error_at(checks::kIdentifierFormat, "workflow_id", "'" + wf.workflow_id + "' is not an identifier"));
  }
  if (wf.steps.empty()) {
    out.push_back(error_at(checks::kNonemptySteps, "steps", "a workflow needs at least one step"));
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& s = wf.steps[i];
    const std::string loc = index_path("steps", i);
    if (!is_identifier(s.step_id)) {
      out.push_back(error_at(checks::kIdentifierFormat, join_path(loc, "step_id"), "'" + s.step_id + "' is not an identifier"));
    }
    if (!is_identifier(s.tool_id)) {
      out.push_back(error_at(checks::kIdentifierFormat, join_path(loc, "tool_id"), "'" + s.tool_id + "' is not an identifier"));
    }
    if (!ids.insert(s.step_id).second) {
      out.push_back(error_at(checks::kDuplicateId, join_path(loc, "step_id"), "duplicate step_id '" + s.step_id + "'"));
    }
    if (s.estimated_duration < 0) {
      out.push_back(error_at(checks::kParameterConsistency, join_path(loc, "estimated_duration"), "must be >= 0"));
    }
  }
  auto exists = [&](const std::string& id) { return wf.step(id) != nullptr; };
  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& s = wf.steps[i];
    std::set<std::string> seen;
    for (std::size_t j = 0; j < s.dependencies.size(); ++j) {
      const auto& dep = s.dependencies[j];
      const std::string loc = index_path(join_path(index_path("steps", i), "dependencies"), j);
      if (dep == s.step_id) {
        out.push_back(error_at(checks::kSelfReference, loc, "step '" + s.step_id + "' depends on itself"));
      } else if (!exists(dep)) {
        out.push_back(error_at(checks::kDanglingReference, loc, "unknown step '" + dep + "'"));
      }
      if (!seen.insert(dep).second) {
        out.push_back(error_at(checks::kDuplicateId, loc, "duplicate dependency '" + dep + "'"));
      }
    }
  }
  for (std::size_t i = 0; i < wf.parameter_mappings.size(); ++i) {
    const auto& m = wf.parameter_mappings[i];
    const std::string loc = index_path("parameter_mappings", i);
    if (!exists(m.from_step)) {
      out.push_back(error_at(checks::kDanglingReference, join_path(loc, "from_step"), "unknown step '" + m.from_step + "'"));
    }
    if (!exists(m.to_step)) {
      out.push_back(error_at(checks::kDanglingReference, join_path(loc, "to_step"), "unknown step '" + m.to_step + "'"));
    }
    if (m.from_step == m.to_step) {
      out.push_back(error_at(checks::kSelfReference, loc, "mapping source and target are the same step"));
    }
  }
  std::set<std::string> edge_ids;
  for (std::size_t i = 0; i < wf.edges.size(); ++i) {
    const auto& e = wf.edges[i];
    const std::string loc = index_path("edges", i);
    if (!edge_ids.insert(e.edge_id).second) {
      out.push_back(error_at(checks::kDuplicateId, join_path(loc, "edge_id"), "duplicate edge_id '" + e.edge_id + "'"));
    }
    if (!exists(e.source_node_id)) {
      out.push_back(error_at(checks::kDanglingReference, join_path(loc, "source_node_id"),
                             "unknown step '" + e.source_node_id + "'"));
    }
    if (!exists(e.target_node_id)) {
      out.push_back(error_at(checks::kDanglingReference, join_path(loc, "target_node_id"),
                             "unknown step '" + e.target_node_id + "'"));
    }
    if (e.source_node_id == e.target_node_id) {
      out.push_back(error_at(checks::kSelfReference, loc, "edge source and target are the same step"));
    }
  }
  for (const auto& p : wf.parameters) {
    const std::string loc = join_path("parameters", p.name);
    if (!is_identifier(p.name)) {
      out.push_back(error_at(checks::kIdentifierFormat, loc, "'" + p.name + "' is not an identifier"));
    }
    check_parameter_coherence(p, loc, out);
  }
  return out;
}

ParseResult<ToolDefinition> parse_tool_definition(const Json& document) {
  auto decoded = decode_tool_definition(document);
  Diagnostics diags = std::move(decoded.diagnostics);
  if (decoded.tool) {
    auto inv = check_tool_invariants(*decoded.tool);
    diags.insert(diags.end(), inv.begin(), inv.end());
  }
  return finish(std::move(decoded.tool), std::move(diags));
}

ParseResult<WorkflowDefinition> parse_workflow_definition(const Json& document) {
  auto decoded = decode_workflow_definition(document);
  Diagnostics diags = std::move(decoded.diagnostics);
  if (decoded.workflow) {
    auto inv = check_workflow_invariants(*decoded.workflow);
    diags.insert(diags.end(), inv.begin(), inv.end());
  }
  return finish(std::move(decoded.workflow), std::move(diags));
}

ParseResult<ToolDefinition> parse_tool_definition_text(const std::string& text) {
  Diagnostics diags;
  Json doc = parse_text(text, diags);
  if (!diags.empty()) return diags;
  return parse_tool_definition(doc);
}

ParseResult<WorkflowDefinition> parse_workflow_definition_text(const std::string& text) {
  Diagnostics diags;
  Json doc = parse_text(text, diags);
  if (!diags.empty()) return diags;
  return parse_workflow_definition(doc);
}

Json type_document(const SemanticType& type) {
  Json doc = Json::object();
  switch (type.kind()) {
    case TypeKind::kDataFrame:
      doc["type"] = "dataframe";
      if (type.dynamic_columns()) {
        doc["columns"] = "dynamic";
      } else {
        doc["columns"] = Json(type.columns());
      }
      break;
    case TypeKind::kDict:
      doc["type"] = "dict";
      if (!type.keys().empty()) doc["keys"] = type.keys();
      break;
    default:
      doc["type"] = type.render();
  }
  return doc;
}

namespace {

Json rules_document(const ParameterDefinition& p, bool include_allowed) {
  Json rules = Json::object();
  for (const auto& rule : p.rules) rules[std::string(rule_name(rule.kind))] = rule.payload;
  if (include_allowed && p.allowed_values) rules["allowed_values"] = Json(*p.allowed_values);
  return rules;
}

Json slots_document(const std::vector<Slot>& slots) {
  Json doc = Json::object();
  for (const auto& slot : slots) doc[slot.name] = type_document(slot.type);
  return doc;
}

}  // namespace

Json tool_parameter_document(const ParameterDefinition& p) {
  Json doc = Json::object();
  doc["name"] = p.name;
  doc["type"] = p.type.render();
  doc["description"] = p.description;
  doc["required"] = p.required;
  if (p.default_value) doc["default"] = *p.default_value;
  if (p.allowed_values) doc["allowed_values"] = Json(*p.allowed_values);
  if (!p.examples.empty()) doc["examples"] = Json(p.examples);
  if (!p.rules.empty()) doc["validation_rules"] = rules_document(p, false);
  return doc;
}

Json workflow_parameter_document(const ParameterDefinition& p) {
  Json doc = Json::object();
  doc["type"] = p.type.render();
  doc["required"] = p.required;
  if (p.default_value) doc["default"] = *p.default_value;
  doc["description"] = p.description;
  if (!p.rules.empty() || p.allowed_values) doc["validation_rules"] = rules_document(p, true);
  if (!p.examples.empty()) doc["examples"] = Json(p.examples);
  return doc;
}

Json parameter_schema_document(const ParameterSchema& schema) {
  Json doc = Json::object();
  for (const auto& p : schema) doc[p.name] = workflow_parameter_document(p);
  return doc;
}

Json to_document(const ToolDefinition& tool) {
  Json doc = Json::object();
  doc["id"] = tool.id;
  doc["name"] = tool.name;
  doc["description"] = tool.description;
  doc["version"] = tool.version.str();
  Json params = Json::array();
  for (const auto& p : tool.parameters) params.push_back(tool_parameter_document(p));
  doc["parameters"] = std::move(params);
  doc["input_schema"] = slots_document(tool.io.inputs);
  doc["output_schema"] = slots_document(tool.io.outputs);
  doc["dependencies"] = tool.dependencies;
  doc["domain_tags"] = tool.domain_tags;
  doc["provenance"] = Json{{"origin", tool.provenance.origin}, {"maintainer", tool.provenance.maintainer}};
  doc["estimated_duration"] = tool.estimated_duration;
  doc["requires_network"] = tool.requires_network;
  return doc;
}

Json to_document(const WorkflowDefinition& wf) {
  Json doc = Json::object();
  doc["workflow_id"] = wf.workflow_id;
  doc["name"] = wf.name;
  doc["description"] = wf.description;
  doc["version"] = wf.version.str();
  Json steps = Json::array();
  for (const auto& s : wf.steps) {
    Json step = Json::object();
    step["step_id"] = s.step_id;
    step["tool_id"] = s.tool_id;
    step["name"] = s.name;
    step["description"] = s.description;
    step["parameters"] = s.parameters;
    step["dependencies"] = s.dependencies;
    step["estimated_duration"] = s.estimated_duration;
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  Json maps = Json::array();
  for (const auto& m : wf.parameter_mappings) {
    maps.push_back(Json{{"from_step", m.from_step},
                        {"from_parameter", m.from_parameter},
                        {"to_step", m.to_step},
                        {"to_parameter", m.to_parameter},
                        {"description", m.description}});
  }
  doc["parameter_mappings"] = std::move(maps);
  Json edges = Json::array();
  for (const auto& e : wf.edges) {
    edges.push_back(Json{{"edge_id", e.edge_id},
                         {"source_node_id", e.source_node_id},
                         {"target_node_id", e.target_node_id},
                         {"source_output", e.source_output},
                         {"target_input", e.target_input}});
  }
  doc["edges"] = std::move(edges);
  doc["parameters"] = parameter_schema_document(wf.parameters);
  Json meta = Json::object();
  if (wf.metadata.complexity) meta["complexity"] = *wf.metadata.complexity;
  if (wf.metadata.estimated_duration_minutes) meta["estimated_duration_minutes"] = *wf.metadata.estimated_duration_minutes;
  meta["tags"] = wf.metadata.tags;
  meta["categories"] = wf.metadata.categories;
  meta["use_cases"] = wf.metadata.use_cases;
  doc["metadata"] = std::move(meta);
  return doc;
}

Json to_document(const Diagnostic& d) {
  return Json{{"severity", std::string(severity_name(d.severity))},
              {"check", d.check},
              {"location", d.location},
              {"message", d.message}};
}

Json to_document(const Diagnostics& diagnostics) {
  Json out = Json::array();
  for (const auto& d : diagnostics) out.push_back(to_document(d));
  return out;
}

std::string canonical_text(const ToolDefinition& tool) { return render_document(to_document(tool)); }
std::string canonical_text(const WorkflowDefinition& workflow) { return render_document(to_document(workflow)); }

}  // namespace schemagate
