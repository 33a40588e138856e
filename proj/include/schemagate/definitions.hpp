#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "schemagate/document.hpp"
#include "schemagate/semantic_type.hpp"
#include "schemagate/semver.hpp"

namespace schemagate {

enum class RuleKind { kNotEmpty, kMin, kMax, kRequired };

std::string_view rule_name(RuleKind kind);

/// A pre-execution constraint on a parameter value. allowed_values lives on
/// ParameterDefinition directly since both document formats carry it.
struct ValidationRule {
  RuleKind kind = RuleKind::kNotEmpty;
  Json payload;

  bool operator==(const ValidationRule&) const = default;
};

struct ParameterDefinition {
  std::string name;
  SemanticType type;
  std::string description;
  bool required = false;
  std::optional<Json> default_value;
  std::optional<std::vector<Json>> allowed_values;
  std::vector<Json> examples;
  std::vector<ValidationRule> rules;

  bool operator==(const ParameterDefinition&) const = default;
};

using ParameterSchema = std::vector<ParameterDefinition>;

const ParameterDefinition* find_parameter(const ParameterSchema& schema, std::string_view name);

struct Slot {
  std::string name;
  SemanticType type;

  bool operator==(const Slot&) const = default;
};

struct IOContract {
  std::vector<Slot> inputs;
  std::vector<Slot> outputs;

  const Slot* input(std::string_view name) const;
  const Slot* output(std::string_view name) const;

  bool operator==(const IOContract&) const = default;
};

struct ToolProvenance {
  std::string origin;
  std::string maintainer;

  bool operator==(const ToolProvenance&) const = default;
};

struct ToolDefinition {
  std::string id;
  std::string name;
  std::string description;
  SemVer version;
  ParameterSchema parameters;
  IOContract io;
  std::vector<std::string> dependencies;
  std::vector<std::string> domain_tags;
  ToolProvenance provenance;
  double estimated_duration = 0.0;
  bool requires_network = false;

  bool operator==(const ToolDefinition&) const = default;
};

struct StepDefinition {
  std::string step_id;
  std::string tool_id;
  std::string name;
  std::string description;
  Json parameters = Json::object();
  std::vector<std::string> dependencies;
  double estimated_duration = 0.0;

  bool operator==(const StepDefinition&) const = default;
};

struct ParameterMapping {
  std::string from_step;
  std::string from_parameter;
  std::string to_step;
  std::string to_parameter;
  std::string description;

  bool operator==(const ParameterMapping&) const = default;
};

struct EdgeDefinition {
  std::string edge_id;
  std::string source_node_id;
  std::string target_node_id;
  std::string source_output;
  std::string target_input;

  bool operator==(const EdgeDefinition&) const = default;
};

struct WorkflowMetadata {
  std::optional<std::string> complexity;
  std::optional<double> estimated_duration_minutes;
  std::vector<std::string> tags;
  std::vector<std::string> categories;
  std::vector<std::string> use_cases;

  bool operator==(const WorkflowMetadata&) const = default;
};

/// Version assumed for workflow documents that omit one.
inline constexpr SemVer kDefaultWorkflowVersion{1, 0, 0};

struct WorkflowDefinition {
  std::string workflow_id;
  std::string name;
  std::string description;
  SemVer version = kDefaultWorkflowVersion;
  std::vector<StepDefinition> steps;
  std::vector<ParameterMapping> parameter_mappings;
  std::vector<EdgeDefinition> edges;
  ParameterSchema parameters;
  WorkflowMetadata metadata;

  const StepDefinition* step(std::string_view step_id) const;

  bool operator==(const WorkflowDefinition&) const = default;
};

bool is_identifier(std::string_view text);

/// A step literal of the form "${name}" binds the step parameter to the
/// workflow-level parameter `name`. Returns the referenced name.
std::optional<std::string> workflow_reference(const Json& literal);

}  // namespace schemagate
