#include "schemagate/validation.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/values.hpp"

namespace schemagate {

Diagnostics ValidationReport::diagnostics() const {
  Diagnostics all;
  for (const auto& c : checks) all.insert(all.end(), c.diagnostics.begin(), c.diagnostics.end());
  return all;
}

const CheckResult* ValidationReport::check(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.check == name) return &c;
  }
  return nullptr;
}

namespace {

std::map<std::string, std::size_t> step_index(const WorkflowDefinition& wf) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < wf.steps.size(); ++i) index.emplace(wf.steps[i].step_id, i);
  return index;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Published tool per step index; null where the tool is unavailable.
std::vector<std::shared_ptr<const ToolDefinition>> step_tools(const WorkflowDefinition& wf,
                                                               const ToolResolver& tools) {
  std::vector<std::shared_ptr<const ToolDefinition>> out;
  std::map<std::string, std::shared_ptr<const ToolDefinition>> cache;
  for (const auto& step : wf.steps) {
    auto it = cache.find(step.tool_id);
    if (it == cache.end()) it = cache.emplace(step.tool_id, tools.lookup_tool(step.tool_id).tool).first;
    out.push_back(it->second);
  }
  return out;
}

/// Arcs over step indices from dependencies and edges; dangling names skipped.
std::vector<std::set<std::size_t>> dependency_arcs(const WorkflowDefinition& wf, bool include_mappings) {
  const auto index = step_index(wf);
  std::vector<std::set<std::size_t>> succ(wf.steps.size());
  auto add = [&](const std::string& from, const std::string& to) {
    auto f = index.find(from);
    auto t = index.find(to);
    if (f != index.end() && t != index.end()) succ[f->second].insert(t->second);
  };
  for (const auto& step : wf.steps) {
    for (const auto& dep : step.dependencies) add(dep, step.step_id);
  }
  for (const auto& e : wf.edges) add(e.source_node_id, e.target_node_id);
  if (include_mappings) {
    for (const auto& m : wf.parameter_mappings) add(m.from_step, m.to_step);
  }
  return succ;
}

struct Flow {
  std::string location;
  std::string label;
  std::string from_step;
  std::string from_slot;
  std::string to_step;
  std::string to_slot;
};

std::vector<Flow> edge_flows(const WorkflowDefinition& wf) {
  std::vector<Flow> flows;
  for (std::size_t i = 0; i < wf.edges.size(); ++i) {
    const auto& e = wf.edges[i];
    flows.push_back({"edges[" + std::to_string(i) + "]", "edge '" + e.edge_id + "'", e.source_node_id,
                     e.source_output, e.target_node_id, e.target_input});
  }
  return flows;
}

std::vector<Flow> mapping_flows(const WorkflowDefinition& wf) {
  std::vector<Flow> flows;
  for (std::size_t i = 0; i < wf.parameter_mappings.size(); ++i) {
    const auto& m = wf.parameter_mappings[i];
    flows.push_back({"parameter_mappings[" + std::to_string(i) + "]",
                     "mapping " + m.from_step + "." + m.from_parameter + " -> " + m.to_step + "." + m.to_parameter,
                     m.from_step, m.from_parameter, m.to_step, m.to_parameter});
  }
  return flows;
}

}  // namespace

Diagnostics check_acyclicity(const WorkflowDefinition& wf) {
  const auto succ = dependency_arcs(wf, false);
  const std::size_t n = wf.steps.size();
  enum Color { kWhite, kGray, kBlack };
  std::vector<Color> color(n, kWhite);
  std::vector<std::size_t> stack;
  std::set<std::vector<std::size_t>> seen;
  Diagnostics out;

  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    color[u] = kGray;
    stack.push_back(u);
    for (auto v : succ[u]) {
      if (color[v] == kGray) {
        auto from = std::find(stack.begin(), stack.end(), v);
        std::vector<std::size_t> cycle(from, stack.end());
        auto key = cycle;
        std::rotate(key.begin(), std::min_element(key.begin(), key.end()), key.end());
        if (!seen.insert(key).second) continue;
        std::vector<std::string> names;
        for (auto idx : cycle) names.push_back(wf.steps[idx].step_id);
        names.push_back(wf.steps[v].step_id);
        out.push_back(error_at(checks::kAcyclicity, "steps[" + std::to_string(v) + "]",
                               "dependency cycle: " + join(names, " -> ")));
      } else if (color[v] == kWhite) {
        visit(v);
      }
    }
    stack.pop_back();
    color[u] = kBlack;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (color[i] == kWhite) visit(i);
  }
  return out;
}

Diagnostics check_tool_availability(const WorkflowDefinition& wf, const ToolResolver& tools) {
  Diagnostics out;
  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& step = wf.steps[i];
    const auto lookup = tools.lookup_tool(step.tool_id);
    if (lookup.availability == Availability::kPublished) continue;
    std::string why;
    switch (lookup.availability) {
      case Availability::kRetired: why = "is retired"; break;
      case Availability::kDraftOnly: why = "exists only as a draft"; break;
      default: why = "is not in the registry"; break;
    }
    out.push_back(error_at(checks::kToolAvailability, "steps[" + std::to_string(i) + "].tool_id",
                           "step '" + step.step_id + "': tool '" + step.tool_id + "' " + why));
  }
  return out;
}

Diagnostics check_mapping_consistency(const WorkflowDefinition& wf, const ToolResolver& tools) {
  const auto index = step_index(wf);
  const auto resolved = step_tools(wf, tools);
  Diagnostics out;
  auto check_flow = [&](const Flow& f, const std::string& out_key, const std::string& in_key) {
    auto src = index.find(f.from_step);
    auto dst = index.find(f.to_step);
    if (src == index.end() || dst == index.end()) return;
    if (const auto& tool = resolved[src->second]; tool && !tool->io.output(f.from_slot)) {
      out.push_back(error_at(checks::kMappingConsistency, f.location + "." + out_key,
                             f.label + ": tool '" + tool->id + "' has no output '" + f.from_slot + "'"));
    }
    if (const auto& tool = resolved[dst->second]; tool && !tool->io.input(f.to_slot)) {
      out.push_back(error_at(checks::kMappingConsistency, f.location + "." + in_key,
                             f.label + ": tool '" + tool->id + "' has no input '" + f.to_slot + "'"));
    }
    const auto& deps = wf.steps[dst->second].dependencies;
    if (std::find(deps.begin(), deps.end(), f.from_step) == deps.end()) {
      out.push_back(error_at(checks::kMappingConsistency, f.location,
                             f.label + ": step '" + f.to_step + "' does not declare a dependency on '" +
                                 f.from_step + "'"));
    }
  };
  for (const auto& f : edge_flows(wf)) check_flow(f, "source_output", "target_input");
  for (const auto& f : mapping_flows(wf)) check_flow(f, "from_parameter", "to_parameter");
  return out;
}

Diagnostics check_edge_types(const WorkflowDefinition& wf, const ToolResolver& tools) {
  const auto index = step_index(wf);
  const auto resolved = step_tools(wf, tools);
  Diagnostics out;
  auto check_flow = [&](const Flow& f) {
    auto src = index.find(f.from_step);
    auto dst = index.find(f.to_step);
    if (src == index.end() || dst == index.end()) return;
    const auto& st = resolved[src->second];
    const auto& dt = resolved[dst->second];
    if (!st || !dt) return;
    const Slot* from = st->io.output(f.from_slot);
    const Slot* to = dt->io.input(f.to_slot);
    if (!from || !to || types_compatible(from->type, to->type)) return;
    std::string msg = f.label + ": " + f.from_step + "." + f.from_slot + " (" + from->type.render() +
                      ") cannot flow into " + f.to_step + "." + f.to_slot + " (" + to->type.render() + ")";
    const auto missing = missing_columns(from->type, to->type);
    if (!missing.empty()) {
      msg += "; missing columns: " + join(std::vector<std::string>(missing.begin(), missing.end()), ", ");
    }
    out.push_back(error_at(checks::kEdgeTypeCompatibility, f.location, msg));
  };
  const auto edges = edge_flows(wf);
  for (const auto& f : edges) check_flow(f);
  for (const auto& f : mapping_flows(wf)) {
    const bool covered = std::any_of(edges.begin(), edges.end(), [&](const Flow& e) {
      return e.from_step == f.from_step && e.from_slot == f.from_slot && e.to_step == f.to_step &&
             e.to_slot == f.to_slot;
    });
    if (!covered) check_flow(f);
  }
  return out;
}

Diagnostics check_parameter_resolution(const WorkflowDefinition& wf, const ToolResolver& tools) {
  const auto resolved = step_tools(wf, tools);
  Diagnostics out;
  std::set<std::string> used;

  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& step = wf.steps[i];
    const auto& tool = resolved[i];
    if (!tool) continue;
    const std::string base = "steps[" + std::to_string(i) + "].parameters";
    const std::string who = "step '" + step.step_id + "'";

    // Targets bound by a literal or a workflow parameter (at most one each).
    std::map<std::string, std::string> direct;
    for (const auto& [key, value] : step.parameters.items()) {
      const std::string loc = base + "." + key;
      const ParameterDefinition* param = find_parameter(tool->parameters, key);
      const Slot* slot = tool->io.input(key);
      if (!param && !slot) {
        out.push_back(error_at(checks::kParameterResolution, loc,
                               who + " sets '" + key + "', which tool '" + tool->id +
                                   "' declares neither as a parameter nor as an input"));
        continue;
      }
      const SemanticType& target = param ? param->type : slot->type;
      if (auto ref = workflow_reference(value)) {
        const ParameterDefinition* wp = find_parameter(wf.parameters, *ref);
        if (!wp) {
          out.push_back(error_at(checks::kParameterResolution, loc,
                                 who + " references undefined workflow parameter '" + *ref + "'"));
          direct[key] = "workflow parameter '" + *ref + "'";
          continue;
        }
        used.insert(*ref);
        if (!types_compatible(wp->type, target)) {
          out.push_back(error_at(checks::kParameterResolution, loc,
                                 who + ": workflow parameter '" + *ref + "' (" + wp->type.render() +
                                     ") is incompatible with '" + key + "' (" + target.render() + ")"));
        }
        direct[key] = "workflow parameter '" + *ref + "'";
        continue;
      }
      if (param) {
        for (auto d : validate_value(value, *param, loc)) {
          out.push_back(error_at(checks::kParameterResolution, d.location,
                                 who + ": literal for '" + key + "' rejected (" + d.check + "): " + d.message));
        }
      } else if (!value_conforms(value, slot->type)) {
        out.push_back(error_at(checks::kParameterResolution, loc,
                               who + ": literal for input '" + key + "' is not a " + slot->type.render()));
      }
      direct[key] = "step literal";
    }

    // Same-named workflow parameters bind tool parameters implicitly; with a
    // literal present the literal acts as the default for that binding.
    for (const auto& p : tool->parameters) {
      const ParameterDefinition* wp = find_parameter(wf.parameters, p.name);
      if (!wp) continue;
      auto lit = direct.find(p.name);
      if (lit != direct.end() && lit->second != "step literal") continue;
      used.insert(p.name);
      if (!types_compatible(wp->type, p.type)) {
        out.push_back(error_at(checks::kParameterResolution, base + "." + p.name,
                               who + ": workflow parameter '" + p.name + "' (" + wp->type.render() +
                                   ") is incompatible with the tool parameter (" + p.type.render() + ")"));
      }
      if (lit == direct.end()) {
        if (p.required && !wp->required && !wp->default_value) {
          out.push_back(error_at(checks::kParameterResolution, base + "." + p.name,
                                 who + ": required parameter '" + p.name +
                                     "' is bound to an optional workflow parameter without a default"));
        }
        direct[p.name] = "workflow parameter '" + p.name + "'";
      }
    }

    std::map<std::string, std::set<std::string>> incoming;
    auto collect = [&](const std::vector<Flow>& flows) {
      for (const auto& f : flows) {
        if (f.to_step == step.step_id) incoming[f.to_slot].insert(f.from_step + "." + f.from_slot);
      }
    };
    collect(mapping_flows(wf));

    auto evaluate = [&](const std::string& name, bool required, std::string_view kind) {
      std::vector<std::string> sources;
      if (auto d = direct.find(name); d != direct.end()) sources.push_back(d->second);
      if (auto in = incoming.find(name); in != incoming.end()) {
        for (const auto& s : in->second) sources.push_back("mapping from " + s);
      }
      if (sources.size() > 1) {
        out.push_back(error_at(checks::kParameterResolution, base + "." + name,
                               who + ": " + std::string(kind) + " '" + name + "' is bound more than once (" +
                                   join(sources, "; ") + ")"));
      } else if (sources.empty() && required) {
        out.push_back(error_at(checks::kParameterResolution, base + "." + name,
                               who + ": required " + std::string(kind) + " '" + name + "' is unbound"));
      }
    };
    for (const auto& p : tool->parameters) evaluate(p.name, p.required, "parameter");
    for (const auto& s : tool->io.inputs) evaluate(s.name, true, "input");
  }

  for (const auto& wp : wf.parameters) {
    if (!used.count(wp.name)) {
      out.push_back(warning_at(checks::kParameterResolution, "parameters." + wp.name,
                               "workflow parameter '" + wp.name + "' is not consumed by any step"));
    }
  }
  return out;
}

ValidationReport validate_workflow(const WorkflowDefinition& wf, const ToolResolver& tools) {
  ValidationReport report;
  report.workflow_id = wf.workflow_id;
  Diagnostics resolution = check_workflow_invariants(wf);
  auto params = check_parameter_resolution(wf, tools);
  resolution.insert(resolution.end(), params.begin(), params.end());
  report.checks.push_back({std::string(checks::kAcyclicity), check_acyclicity(wf)});
  report.checks.push_back({std::string(checks::kEdgeTypeCompatibility), check_edge_types(wf, tools)});
  report.checks.push_back({std::string(checks::kParameterResolution), std::move(resolution)});
  report.checks.push_back({std::string(checks::kToolAvailability), check_tool_availability(wf, tools)});
  report.checks.push_back({std::string(checks::kMappingConsistency), check_mapping_consistency(wf, tools)});
  report.valid = std::all_of(report.checks.begin(), report.checks.end(),
                             [](const CheckResult& c) { return c.passed(); });
  return report;
}

Json to_document(const ValidationReport& report) {
  Json doc = Json::object();
  doc["workflow_id"] = report.workflow_id;
  doc["valid"] = report.valid;
  Json checks_doc = Json::array();
  for (const auto& c : report.checks) {
    Json entry = Json::object();
    entry["check"] = c.check;
    entry["outcome"] = c.passed() ? "pass" : "fail";
    entry["diagnostics"] = to_document(c.diagnostics);
    checks_doc.push_back(std::move(entry));
  }
  doc["checks"] = std::move(checks_doc);
  return doc;
}

std::string render_report_text(const ValidationReport& report) {
  std::ostringstream out;
  out << "workflow " << report.workflow_id << ": " << (report.valid ? "valid" : "INVALID") << "\n";
  char line[128];
  std::snprintf(line, sizeof(line), "  %-26s %-8s %6s %8s\n", "check", "outcome", "errors", "warnings");
  out << line;
  for (const auto& c : report.checks) {
    const auto errors = count_errors(c.diagnostics);
    std::snprintf(line, sizeof(line), "  %-26s %-8s %6zu %8zu\n", c.check.c_str(), c.passed() ? "pass" : "fail",
                  errors, c.diagnostics.size() - errors);
    out << line;
  }
  for (const auto& d : report.diagnostics()) out << "  " << render_diagnostic(d) << "\n";
  return out.str();
}

DependencyGraph::DependencyGraph(std::set<std::string> nodes, std::set<std::pair<std::string, std::string>> arcs)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  for (const auto& [from, to] : arcs_) {
    if (!nodes_.count(from) || !nodes_.count(to)) {
      throw std::invalid_argument("arc " + from + " -> " + to + " references a non-member node");
    }
  }
  topological_order();
}

std::vector<std::string> DependencyGraph::topological_order() const {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& n : nodes_) indegree[n] = 0;
  for (const auto& [from, to] : arcs_) {
    ++indegree[to];
    succ[from].push_back(to);
  }
  std::set<std::string> frontier;
  for (const auto& [n, d] : indegree) {
    if (d == 0) frontier.insert(n);
  }
  std::vector<std::string> order;
  while (!frontier.empty()) {
    auto n = *frontier.begin();
    frontier.erase(frontier.begin());
    order.push_back(n);
    for (const auto& s : succ[n]) {
      if (--indegree[s] == 0) frontier.insert(s);
    }
  }
  if (order.size() == nodes_.size()) return order;

  // Every leftover node has a leftover predecessor; walking predecessors
  // from any of them must revisit a node.
  std::map<std::string, std::string> pred;
  for (const auto& [from, to] : arcs_) {
    if (indegree[from] > 0 && indegree[to] > 0 && !pred.count(to)) pred[to] = from;
  }
  std::string cur;
  for (const auto& [n, d] : indegree) {
    if (d > 0) {
      cur = n;
      break;
    }
  }
  std::vector<std::string> walk;
  std::map<std::string, std::size_t> pos;
  while (!pos.count(cur)) {
    pos[cur] = walk.size();
    walk.push_back(cur);
    cur = pred.at(cur);
  }
  std::vector<std::string> cycle(walk.begin() + static_cast<std::ptrdiff_t>(pos[cur]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  cycle.push_back(cycle.front());
  throw CyclicDependencies("dependency cycle: " + join(cycle, " -> "));
}

DependencyGraph DependencyGraph::closure_of(const std::string& target, const ToolResolver& tools) {
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> arcs;
  std::queue<std::string> pending;
  auto target_lookup = tools.lookup_tool(target);
  if (!target_lookup.tool) {
    throw NotFound("tool '" + target + "' is not published (" +
                   std::string(availability_name(target_lookup.availability)) + ")");
  }
  pending.push(target);
  nodes.insert(target);
  while (!pending.empty()) {
    const auto id = pending.front();
    pending.pop();
    const auto tool = tools.lookup_tool(id).tool;
    for (const auto& dep : tool->dependencies) {
      arcs.emplace(dep, id);
      if (nodes.count(dep)) continue;
      const auto lookup = tools.lookup_tool(dep);
      if (!lookup.tool) {
        throw NotFound("dependency '" + dep + "' of '" + id + "' is not published (" +
                       std::string(availability_name(lookup.availability)) + ")");
      }
      nodes.insert(dep);
      pending.push(dep);
    }
  }
  return DependencyGraph(std::move(nodes), std::move(arcs));
}

std::vector<std::string> suggest_composition(const std::string& target_tool, const ToolResolver& tools) {
  return DependencyGraph::closure_of(target_tool, tools).topological_order();
}

std::vector<std::string> step_order(const WorkflowDefinition& wf) {
  const auto succ = dependency_arcs(wf, true);
  const std::size_t n = wf.steps.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& s : succ) {
    for (auto v : s) ++indegree[v];
  }
  std::set<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) frontier.insert(i);
  }
  std::vector<std::string> order;
  while (!frontier.empty()) {
    auto u = *frontier.begin();
    frontier.erase(frontier.begin());
    order.push_back(wf.steps[u].step_id);
    for (auto v : succ[u]) {
      if (--indegree[v] == 0) frontier.insert(v);
    }
  }
  if (order.size() != n) {
    const auto cycles = check_acyclicity(wf);
    throw CyclicDependencies(cycles.empty() ? "workflow steps form a cycle" : cycles.front().message);
  }
  return order;
}

std::vector<std::string> upstream_steps(const WorkflowDefinition& wf, const std::string& step_id) {
  std::set<std::string> up;
  if (const auto* step = wf.step(step_id)) up.insert(step->dependencies.begin(), step->dependencies.end());
  for (const auto& e : wf.edges) {
    if (e.target_node_id == step_id) up.insert(e.source_node_id);
  }
  for (const auto& m : wf.parameter_mappings) {
    if (m.to_step == step_id) up.insert(m.from_step);
  }
  std::vector<std::string> ordered;
  for (const auto& s : wf.steps) {
    if (up.count(s.step_id)) ordered.push_back(s.step_id);
  }
  return ordered;
}

}  // namespace schemagate
