#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schemagate/gate.hpp"

namespace schemagate {

/// A session script:
///
///   {"seed": 7,
///    "planner": [ScriptedPlanner rules],
///    "turns": [{"turn", "actor", "action", "say"?, "select"?, "op"?, "approve"?, "await"?,
///               "probe_dispatch"?, "expect"?}]}
///
/// User turns drive gate.step with `say`. System turns inspect the outcome of
/// the latest user turn and may run `op` ("dispatch", "await_run").
struct ReplayRow {
  int turn = 0;
  std::string actor;
  std::string action;
  std::string detail;
  std::string gate;
  bool ok = true;
};

struct ReplayResult {
  std::vector<ReplayRow> rows;
  bool passed = true;
  /// Expected vs. actual at the first diverging turn.
  std::optional<std::string> divergence;
  std::vector<std::string> run_ids;
  std::string session_id;
};

/// Seed declared by the script (0 when absent).
std::uint64_t script_seed(const Json& script);

/// Validates the script's shape. Throws InvalidDocument.
void check_script(const Json& script);

ReplayResult replay_session(const Json& script, Gate& gate);

std::string render_replay_table(const ReplayResult& result);
Json to_document(const ReplayResult& result);

}  // namespace schemagate
