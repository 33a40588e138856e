#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "schemagate/definitions.hpp"
#include "schemagate/diagnostic.hpp"
#include "schemagate/resolver.hpp"

namespace schemagate {

struct CheckResult {
  std::string check;
  Diagnostics diagnostics;

  bool passed() const { return !has_errors(diagnostics); }
};

struct ValidationReport {
  std::string workflow_id;
  std::vector<CheckResult> checks;
  bool valid = false;

  /// Every diagnostic across checks, in check order.
  Diagnostics diagnostics() const;
  const CheckResult* check(std::string_view name) const;
};

/// One diagnostic per distinct cycle in the union of step dependencies and
/// edges, in DFS discovery order (steps visited in definition order).
Diagnostics check_acyclicity(const WorkflowDefinition& workflow);
Diagnostics check_edge_types(const WorkflowDefinition& workflow, const ToolResolver& tools);
Diagnostics check_parameter_resolution(const WorkflowDefinition& workflow, const ToolResolver& tools);
Diagnostics check_tool_availability(const WorkflowDefinition& workflow, const ToolResolver& tools);
Diagnostics check_mapping_consistency(const WorkflowDefinition& workflow, const ToolResolver& tools);

ValidationReport validate_workflow(const WorkflowDefinition& workflow, const ToolResolver& tools);

Json to_document(const ValidationReport& report);
/// Fixed-width table for terminals.
std::string render_report_text(const ValidationReport& report);

/// Acyclic tool dependency graph. Construction throws CyclicDependencies.
class DependencyGraph {
 public:
  DependencyGraph(std::set<std::string> nodes, std::set<std::pair<std::string, std::string>> arcs);

  /// Transitive dependency closure of `target` (NotFound if the target or
  /// any dependency is not published).
  static DependencyGraph closure_of(const std::string& target, const ToolResolver& tools);

  const std::set<std::string>& nodes() const noexcept { return nodes_; }
  /// (dependency, dependent) pairs.
  const std::set<std::pair<std::string, std::string>>& arcs() const noexcept { return arcs_; }

  /// Kahn traversal taking the smallest id from the frontier each time.
  std::vector<std::string> topological_order() const;

 private:
  std::set<std::string> nodes_;
  std::set<std::pair<std::string, std::string>> arcs_;
};

std::vector<std::string> suggest_composition(const std::string& target_tool, const ToolResolver& tools);

/// Step ids in an execution-compatible order; ties keep definition order.
/// Throws CyclicDependencies.
std::vector<std::string> step_order(const WorkflowDefinition& workflow);

/// Step ids each step waits on: its dependencies plus edge and mapping sources.
std::vector<std::string> upstream_steps(const WorkflowDefinition& workflow, const std::string& step_id);

}  // namespace schemagate
