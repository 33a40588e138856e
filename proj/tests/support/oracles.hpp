#pragma once

// Independent reference implementations used to cross-check the engine.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "schemagate/definitions.hpp"
#include "schemagate/resolver.hpp"
#include "support/generators.hpp"

namespace testsupport {

using schemagate::StaticToolResolver;
using schemagate::StepDefinition;

struct Digraph {
  int size = 0;
  std::vector<std::pair<int, int>> arcs;
};

inline Digraph random_digraph(Gen& gen, int max_nodes) {
  Digraph g;
  g.size = gen.uniform(1, max_nodes);
  const double density = gen.uniform(2, 30) / 100.0;
  for (int a = 0; a < g.size; ++a) {
    for (int b = 0; b < g.size; ++b) {
      if (a == b ? gen.coin(0.01) : gen.coin(density)) g.arcs.emplace_back(a, b);
    }
  }
  return g;
}

/// Floyd-Warshall reachability; a cycle exists iff some node reaches itself.
inline bool closure_has_cycle(int n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (auto [a, b] : arcs) reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  for (std::size_t k = 0; k < reach.size(); ++k) {
    for (std::size_t i = 0; i < reach.size(); ++i) {
      for (std::size_t j = 0; j < reach.size(); ++j) {
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
      }
    }
  }
  for (std::size_t i = 0; i < reach.size(); ++i) {
    if (reach[i][i]) return true;
  }
  return false;
}

/// Depth-first search from every node, tracking the current path.
inline bool dfs_has_cycle(int n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (auto [a, b] : arcs) out[static_cast<std::size_t>(a)].push_back(b);
  std::vector<bool> on_path(static_cast<std::size_t>(n));
  std::function<bool(int)> visit = [&](int v) {
    if (on_path[static_cast<std::size_t>(v)]) return true;
    on_path[static_cast<std::size_t>(v)] = true;
    for (int w : out[static_cast<std::size_t>(v)]) {
      if (visit(w)) return true;
    }
    on_path[static_cast<std::size_t>(v)] = false;
    return false;
  };
  for (int v = 0; v < n; ++v) {
    if (visit(v)) return true;
  }
  return false;
}

/// Steps n0..n{size-1}; even-numbered arcs become step dependencies and odd
/// ones edges, so both arc sources are exercised.
inline schemagate::WorkflowDefinition digraph_workflow(const Digraph& g) {
  schemagate::WorkflowDefinition wf;
  wf.workflow_id = "digraph";
  for (int i = 0; i < g.size; ++i) {
    StepDefinition s;
    s.step_id = "n" + std::to_string(i);
    s.tool_id = "node";
    wf.steps.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < g.arcs.size(); ++k) {
    const auto [a, b] = g.arcs[k];
    const auto from = "n" + std::to_string(a);
    const auto to = "n" + std::to_string(b);
    auto& deps = wf.steps[static_cast<std::size_t>(b)].dependencies;
    if (k % 2 == 0) {
      deps.push_back(from);
    } else {
      wf.edges.push_back({"e" + std::to_string(k), from, to, "out", "in"});
    }
  }
  return wf;
}

/// "dependency cycle: a -> b -> a": every hop is an arc and it closes.
inline bool cycle_message_is_real_cycle(const std::string& message, const Digraph& g) {
  const std::string prefix = "dependency cycle: ";
  if (message.rfind(prefix, 0) != 0) return false;
  std::vector<int> nodes;
  std::string rest = message.substr(prefix.size());
  std::size_t pos = 0;
  while (true) {
    auto next = rest.find(" -> ", pos);
    auto token = rest.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    nodes.push_back(std::stoi(token.substr(1)));
    if (next == std::string::npos) break;
    pos = next + 4;
  }
  if (nodes.size() < 2 || nodes.front() != nodes.back()) return false;
  std::set<std::pair<int, int>> arcs(g.arcs.begin(), g.arcs.end());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!arcs.count({nodes[i], nodes[i + 1]})) return false;
  }
  return true;
}

/// Lexicographically smallest topological order by exhaustive permutation.
inline std::vector<std::string> smallest_topological_order(const std::set<std::string>& nodes,
                                                           const std::set<std::pair<std::string, std::string>>& arcs) {
  std::vector<std::string> perm(nodes.begin(), nodes.end());
  do {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < perm.size(); ++i) pos[perm[i]] = i;
    if (std::all_of(arcs.begin(), arcs.end(), [&](const auto& a) { return pos[a.first] < pos[a.second]; })) {
      return perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {};
}

struct ToolDag {
  StaticToolResolver tools;
  std::string target;
  std::set<std::string> closure_nodes;
  std::set<std::pair<std::string, std::string>> closure_arcs;
};

/// Random acyclic tool dependency graph with shuffled names, so name order
/// and dependency order are unrelated.
inline ToolDag random_tool_dag(Gen& gen, int max_nodes) {
  ToolDag dag;
  const int n = gen.uniform(1, max_nodes);
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)) + "_tool");
  std::shuffle(names.begin(), names.end(), gen.rng());
  std::vector<schemagate::ToolDefinition> defs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& t = defs[static_cast<std::size_t>(i)];
    t.id = names[static_cast<std::size_t>(i)];
    t.description = "generated";
    for (int j = 0; j < i; ++j) {
      if (gen.coin(0.35)) t.dependencies.push_back(names[static_cast<std::size_t>(j)]);
    }
    dag.tools.add(t);
  }
  const auto& target = defs[static_cast<std::size_t>(gen.uniform(0, n - 1))];
  dag.target = target.id;
  std::vector<std::string> pending{target.id};
  dag.closure_nodes.insert(target.id);
  while (!pending.empty()) {
    auto id = pending.back();
    pending.pop_back();
    for (const auto& d : defs) {
      if (d.id != id) continue;
      for (const auto& dep : d.dependencies) {
        dag.closure_arcs.emplace(dep, id);
        if (dag.closure_nodes.insert(dep).second) pending.push_back(dep);
      }
    }
  }
  return dag;
}

/// One step per tool in `order`, each depending on the previous one, with
/// same-named compatible outputs mapped onto the next step's inputs.
inline schemagate::WorkflowDefinition linear_workflow(const std::vector<std::string>& order,
                                                      const schemagate::ToolResolver& tools) {
  schemagate::WorkflowDefinition wf;
  wf.workflow_id = "composed";
  for (std::size_t i = 0; i < order.size(); ++i) {
    StepDefinition s;
    s.step_id = "s" + std::to_string(i);
    s.tool_id = order[i];
    if (i) s.dependencies.push_back("s" + std::to_string(i - 1));
    wf.steps.push_back(std::move(s));
    if (!i) continue;
    auto prev = tools.lookup_tool(order[i - 1]).tool;
    auto cur = tools.lookup_tool(order[i]).tool;
    for (const auto& out : prev->io.outputs) {
      const auto* in = cur->io.input(out.name);
      if (in && schemagate::types_compatible(out.type, in->type)) {
        wf.parameter_mappings.push_back({"s" + std::to_string(i - 1), out.name, "s" + std::to_string(i), in->name, ""});
      }
    }
  }
  return wf;
}

/// A random workflow that validates against the returned resolver: step i
/// consumes the `out` frame of each upstream step through a mapping and an
/// edge, and its scalar parameters are bound by literals or by workflow
/// parameters.
inline std::pair<schemagate::WorkflowDefinition, StaticToolResolver> valid_workflow(Gen& gen) {
  using schemagate::SemanticType;
  schemagate::WorkflowDefinition wf;
  StaticToolResolver tools;
  wf.workflow_id = "generated";
  wf.name = "generated";
  const int n = gen.uniform(1, 6);
  std::vector<std::set<std::string>> out_columns;
  for (int i = 0; i < n; ++i) {
    const auto sid = "s" + std::to_string(i);
    schemagate::ToolDefinition tool;
    tool.id = "tool_" + std::to_string(i);
    tool.description = "generated";
    auto cols = gen.columns(1, 4);
    out_columns.push_back(cols);
    tool.io.outputs.push_back({"out", SemanticType::dataframe(cols)});
    StepDefinition step;
    step.step_id = sid;
    step.tool_id = tool.id;
    for (int j = 0; j < i; ++j) {
      if (!gen.coin(0.4)) continue;
      const auto src = "s" + std::to_string(j);
      const auto slot = "in_" + src;
      std::set<std::string> want;
      for (const auto& c : out_columns[static_cast<std::size_t>(j)]) {
        if (gen.coin()) want.insert(c);
      }
      tool.io.inputs.push_back({slot, want.empty() ? SemanticType::dataframe() : SemanticType::dataframe(want)});
      step.dependencies.push_back(src);
      wf.parameter_mappings.push_back({src, "out", sid, slot, ""});
      wf.edges.push_back({src + "_to_" + sid, src, sid, "out", slot});
    }
    for (int k = 0, m = gen.uniform(0, 3); k < m; ++k) {
      schemagate::ParameterDefinition p;
      p.name = "p_" + std::to_string(i) + "_" + std::to_string(k);
      p.type = gen.scalar_type();
      p.description = "generated";
      p.required = gen.coin();
      if (p.required) p.examples.push_back(gen.literal(p.type));
      tool.parameters.push_back(p);
      const int how = gen.uniform(0, 2);
      if (how == 0) {
        step.parameters[p.name] = gen.literal(p.type);
      } else if (how == 1) {
        auto wp = p;
        wp.examples.clear();
        wp.required = true;
        wf.parameters.push_back(wp);
      } else if (!p.required) {
        // left unbound; optional
      } else {
        step.parameters[p.name] = gen.literal(p.type);
      }
    }
    tools.add(tool);
    wf.steps.push_back(std::move(step));
  }
  return {wf, std::move(tools)};
}

inline std::vector<std::string> sinks(const schemagate::WorkflowDefinition& wf) {
  std::set<std::string> sources;
  for (const auto& s : wf.steps) sources.insert(s.dependencies.begin(), s.dependencies.end());
  for (const auto& e : wf.edges) sources.insert(e.source_node_id);
  for (const auto& m : wf.parameter_mappings) sources.insert(m.from_step);
  std::vector<std::string> out;
  for (const auto& s : wf.steps) {
    if (!sources.count(s.step_id)) out.push_back(s.step_id);
  }
  return out;
}

inline schemagate::WorkflowDefinition without_step(schemagate::WorkflowDefinition wf, const std::string& id) {
  wf.steps.erase(std::remove_if(wf.steps.begin(), wf.steps.end(), [&](const auto& s) { return s.step_id == id; }),
                 wf.steps.end());
  wf.edges.erase(std::remove_if(wf.edges.begin(), wf.edges.end(),
                                [&](const auto& e) { return e.source_node_id == id || e.target_node_id == id; }),
                 wf.edges.end());
  wf.parameter_mappings.erase(std::remove_if(wf.parameter_mappings.begin(), wf.parameter_mappings.end(),
                                             [&](const auto& m) { return m.from_step == id || m.to_step == id; }),
                              wf.parameter_mappings.end());
  return wf;
}

}  // namespace testsupport
