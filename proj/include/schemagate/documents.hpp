#pragma once

#include <string>
#include <utility>
#include <variant>

#include "schemagate/definitions.hpp"
#include "schemagate/diagnostic.hpp"
#include "schemagate/document.hpp"

namespace schemagate {

/// Either a parsed value or the complete list of violations found.
template <typename T>
class ParseResult {
 public:
  ParseResult(T value) : state_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  ParseResult(Diagnostics diagnostics) : state_(std::move(diagnostics)) {}  // NOLINT

  bool ok() const noexcept { return std::holds_alternative<T>(state_); }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const Diagnostics& diagnostics() const& { return std::get<Diagnostics>(state_); }

 private:
  std::variant<T, Diagnostics> state_;
};

// Decoding is split from invariant checking so that admission can report
// invariant violations per check on a structurally sound candidate.

/// Structural decode only: closed schema, field types, type and version
/// syntax. Invariant diagnostics are not produced here.
struct ToolDecode {
  std::optional<ToolDefinition> tool;
  Diagnostics diagnostics;
};
ToolDecode decode_tool_definition(const Json& document);

struct WorkflowDecode {
  std::optional<WorkflowDefinition> workflow;
  Diagnostics diagnostics;
};
WorkflowDecode decode_workflow_definition(const Json& document);

/// ToolDefinition invariants. Diagnostics carry the admission check they
/// belong to (parameter_consistency, documentation_completeness,
/// version_format, identifier_format, duplicate_id, self_reference).
Diagnostics check_tool_invariants(const ToolDefinition& tool);

/// WorkflowDefinition structural invariants (step ids, references, edge ids,
/// workflow parameter coherence).
Diagnostics check_workflow_invariants(const WorkflowDefinition& workflow);

ParseResult<ToolDefinition> parse_tool_definition(const Json& document);
ParseResult<WorkflowDefinition> parse_workflow_definition(const Json& document);

/// Parses text as JSON first; syntax errors become a schema_structure diagnostic.
ParseResult<ToolDefinition> parse_tool_definition_text(const std::string& text);
ParseResult<WorkflowDefinition> parse_workflow_definition_text(const std::string& text);

Json to_document(const ToolDefinition& tool);
Json to_document(const WorkflowDefinition& workflow);
Json to_document(const Diagnostic& diagnostic);
Json to_document(const Diagnostics& diagnostics);

/// Tool-style parameter entry (list element with `name`).
Json tool_parameter_document(const ParameterDefinition& param);
/// Workflow-style parameter entry (map value; rules under validation_rules).
Json workflow_parameter_document(const ParameterDefinition& param);
Json parameter_schema_document(const ParameterSchema& schema);
/// Parses a workflow-style parameter map. `location` prefixes diagnostics.
ParseResult<ParameterSchema> parse_parameter_schema(const Json& document,
                                                    const std::string& location = "parameters");

std::string canonical_text(const ToolDefinition& tool);
std::string canonical_text(const WorkflowDefinition& workflow);

Json type_document(const SemanticType& type);

}  // namespace schemagate
