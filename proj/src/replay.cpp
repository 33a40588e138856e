#include "schemagate/replay.hpp"

#include <set>
#include <sstream>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"

namespace schemagate {

namespace {

const std::set<std::string> kTurnKeys = {"turn", "actor", "action", "say", "select", "op",
                                         "approve", "await", "probe_dispatch", "expect", "detail"};
const std::set<std::string> kExpectKeys = {"actions", "top_result", "prompts", "state",   "blocked", "dispatched",
                                           "run_status", "metrics", "parent", "changed", "compare", "refused"};

std::string compact(const Json& value) { return value.dump(); }

struct Divergence {
  std::string what;
};

[[noreturn]] void diverge(const std::string& key, const Json& expected, const Json& actual) {
  throw Divergence{key + ": expected " + compact(expected) + ", got " + compact(actual)};
}

class Replayer {
 public:
  Replayer(Gate& gate, ScriptedPlanner planner) : gate_(gate), planner_(std::move(planner)) {}

  ReplayResult run(const Json& turns) {
    result_.session_id = gate_.open_session();
    int index = 0;
    for (const auto& t : turns) {
      ++index;
      ReplayRow row;
      row.turn = t.value("turn", index);
      row.actor = t.value("actor", t.contains("say") ? "User" : "System");
      row.action = t.value("action", "");
      try {
        play(t, row);
      } catch (const Divergence& d) {
        row.ok = false;
        if (row.gate.empty()) row.gate = "diverged";
        result_.rows.push_back(row);
        result_.passed = false;
        result_.divergence = "turn " + std::to_string(row.turn) + ": " + d.what;
        return std::move(result_);
      }
      result_.rows.push_back(std::move(row));
    }
    return std::move(result_);
  }

 private:
  const InvocationObject* pending(const SessionContext& ctx) const { return ctx.pending(); }

  void play(const Json& t, ReplayRow& row) {
    if (t.contains("select")) {
      const auto& sel = t["select"];
      std::optional<SemVer> version;
      if (sel.contains("version")) version = SemVer::parse(sel["version"].get<std::string>());
      gate_.select_workflow(result_.session_id, sel.at("workflow_id").get<std::string>(), version);
      row.detail = "selects " + sel.at("workflow_id").get<std::string>();
    }
    if (t.contains("say")) {
      const auto text = t["say"].get<std::string>();
      last_ = gate_.step(result_.session_id, text, planner_);
      row.detail = row.detail.empty() ? "\"" + text + "\"" : row.detail + ": \"" + text + "\"";
      row.gate = "---";
    }
    if (t.value("probe_dispatch", false)) probe_dispatch(row);
    const auto op = t.value("op", "");
    if (op == "dispatch") {
      dispatch(t, row);
    } else if (op == "await_run") {
      await_run(row);
    } else if (!op.empty()) {
      throw Divergence{"unknown op '" + op + "'"};
    }
    if (t.contains("expect")) check(t["expect"], row);
    if (t.contains("detail")) row.detail = t["detail"].get<std::string>();
    if (row.gate.empty()) row.gate = "---";
  }

  void probe_dispatch(ReplayRow& row) {
    auto ctx = gate_.session(result_.session_id);
    const auto* inv = pending(ctx);
    if (!inv) throw Divergence{"no pending invocation to probe"};
    try {
      auto run_id = gate_.dispatch(result_.session_id, inv->invocation_id);
      result_.run_ids.push_back(run_id);
      blocked_.reset();
    } catch (const Error& e) {
      blocked_ = e.code();
    }
    row.gate = blocked_ ? "dispatch blocked (" + *blocked_ + ")" : "dispatch passed";
  }

  void dispatch(const Json& t, ReplayRow& row) {
    auto ctx = gate_.session(result_.session_id);
    const auto* inv = pending(ctx);
    if (!inv) throw Divergence{"no pending invocation to dispatch"};
    const auto id = inv->invocation_id;
    blocked_.reset();
    try {
      if (t.value("approve", false)) gate_.approve(result_.session_id, id);
      auto run_id = gate_.dispatch(result_.session_id, id);
      result_.run_ids.push_back(run_id);
      row.detail = "dispatched " + id.substr(0, 8) + " as run " + run_id.substr(0, 8);
      row.gate = "passed (validated, approved)";
      if (t.value("await", false)) {
        const auto dispatched = row.detail;
        await_run(row);
        row.detail = dispatched + "; " + row.detail;
      }
    } catch (const Error& e) {
      blocked_ = e.code();
      row.detail = std::string("dispatch refused: ") + e.what();
      row.gate = "blocked (" + e.code() + ")";
    }
  }

  void await_run(ReplayRow& row) {
    if (result_.run_ids.empty()) throw Divergence{"no run to await"};
    last_run_ = gate_.executor().wait(result_.run_ids.back());
    gate_.record_run_result(result_.session_id, *last_run_);
    std::ostringstream detail;
    detail << "run " << run_status_name(last_run_->status);
    for (const auto& s : last_run_->steps) {
      if (!s.metrics) continue;
      for (const auto& [k, v] : s.metrics->items()) {
        if (v.is_number()) detail << "; " << k << "=" << v.get<double>();
      }
    }
    row.detail = detail.str();
  }

  void check(const Json& expect, ReplayRow& row) {
    for (const auto& [key, value] : expect.items()) {
      if (!kExpectKeys.count(key)) throw Divergence{"unknown expectation '" + key + "'"};
    }
    auto ctx = gate_.session(result_.session_id);
    const auto* inv = pending(ctx);

    if (expect.contains("actions")) {
      std::vector<std::string> taken;
      for (const auto& a : last_.actions) taken.push_back(a.action);
      if (last_.proposal) taken.push_back("execute_workflow");
      for (const auto& want : expect["actions"]) {
        if (std::find(taken.begin(), taken.end(), want.get<std::string>()) == taken.end()) {
          diverge("actions", expect["actions"], taken);
        }
      }
      if (row.gate.empty()) row.gate = "action arguments validated";
    }
    if (expect.contains("top_result")) {
      Json top = nullptr;
      for (const auto& a : last_.actions) {
        if (a.action == "search_workflows" && !a.result["results"].empty()) {
          top = a.result["results"][0]["workflow_id"];
        }
      }
      if (top != expect["top_result"]) diverge("top_result", expect["top_result"], top);
      row.detail = "ranked results, top: " + top.get<std::string>();
    }
    if (expect.contains("refused")) {
      Json code = last_.refusal ? Json(last_.refusal->code) : Json(nullptr);
      if (code != expect["refused"]) diverge("refused", expect["refused"], code);
    }
    if (expect.contains("prompts")) {
      if (!inv) diverge("prompts", expect["prompts"], nullptr);
      Json names = Json::array();
      for (const auto& p : gate_.inspect(result_.session_id, inv->invocation_id).prompts) names.push_back(p.parameter);
      if (names != expect["prompts"]) diverge("prompts", expect["prompts"], names);
      if (!names.empty()) {
        std::string joined;
        for (const auto& n : names) joined += (joined.empty() ? "" : ", ") + n.get<std::string>();
        row.detail = "prompts for " + joined;
      }
    }
    if (expect.contains("state")) {
      Json state = inv ? Json(state_name(inv->state)) : Json(nullptr);
      if (state != expect["state"]) diverge("state", expect["state"], state);
      if (row.gate.empty() || row.gate == "---") row.gate = "invocation " + state.get<std::string>();
    }
    if (expect.contains("blocked")) {
      const bool blocked = blocked_.has_value();
      if (blocked != expect["blocked"].get<bool>()) {
        diverge("blocked", expect["blocked"], blocked ? Json(*blocked_) : Json(false));
      }
    }
    if (expect.contains("dispatched")) {
      const bool dispatched = !blocked_ && inv && inv->state == InvocationState::kDispatched;
      if (dispatched != expect["dispatched"].get<bool>()) {
        diverge("dispatched", expect["dispatched"], blocked_ ? Json("gate blocked: " + *blocked_) : Json(dispatched));
      }
    }
    if (expect.contains("run_status")) {
      Json status = last_run_ ? Json(run_status_name(last_run_->status)) : Json(nullptr);
      if (status != expect["run_status"]) diverge("run_status", expect["run_status"], status);
    }
    if (expect.contains("metrics")) {
      std::set<std::string> present;
      if (last_run_) {
        for (const auto& s : last_run_->steps) {
          if (s.metrics) {
            for (const auto& [k, v] : s.metrics->items()) present.insert(k);
          }
        }
      }
      for (const auto& m : expect["metrics"]) {
        if (!present.count(m.get<std::string>())) diverge("metrics", expect["metrics"], Json(present));
      }
    }
    if (expect.contains("parent") || expect.contains("changed")) {
      if (!inv || !inv->parent_invocation) diverge("parent", true, nullptr);
      const auto parent = gate_.invocation(result_.session_id, *inv->parent_invocation);
      if (expect.contains("changed")) {
        std::set<std::string> keys;
        for (const auto& [k, v] : parent.parameters.items()) keys.insert(k);
        for (const auto& [k, v] : inv->parameters.items()) keys.insert(k);
        Json changed = Json::array();
        for (const auto& k : keys) {
          Json a = parent.parameters.contains(k) ? parent.parameters[k] : Json(nullptr);
          Json b = inv->parameters.contains(k) ? inv->parameters[k] : Json(nullptr);
          if (a != b) changed.push_back(k);
        }
        if (changed != expect["changed"]) diverge("changed", expect["changed"], changed);
        row.detail = "amends " + parent.invocation_id.substr(0, 8) + ", changed " + changed.dump();
      }
      if (row.gate.empty() || row.gate == "---") row.gate = "re-validated";
    }
    if (expect.contains("compare")) {
      if (result_.run_ids.size() < 2) diverge("compare", expect["compare"], "fewer than two runs");
      auto cmp = gate_.executor().compare_runs(result_.run_ids[result_.run_ids.size() - 2], result_.run_ids.back());
      if (cmp.parameter_diff != expect["compare"]) diverge("compare", expect["compare"], cmp.parameter_diff);
      row.detail += "; compare: " + cmp.parameter_diff.dump();
    }
  }

  Gate& gate_;
  ScriptedPlanner planner_;
  ReplayResult result_;
  StepOutcome last_;
  std::optional<std::string> blocked_;
  std::optional<RunRecord> last_run_;
};

}  // namespace

std::uint64_t script_seed(const Json& script) {
  if (script.is_object() && script.contains("seed")) return script["seed"].get<std::uint64_t>();
  return 0;
}

void check_script(const Json& script) {
  Diagnostics diags;
  if (!script.is_object()) {
    throw InvalidDocument("session script must be an object",
                          {error_at(checks::kSchemaStructure, "script", "expected an object")});
  }
  for (const auto& [key, value] : script.items()) {
    if (key != "seed" && key != "planner" && key != "turns" && key != "description") {
      diags.push_back(error_at(checks::kSchemaStructure, key, "unknown field"));
    }
  }
  if (script.contains("seed") && !script["seed"].is_number_unsigned()) {
    diags.push_back(error_at(checks::kSchemaStructure, "seed", "expected a non-negative integer"));
  }
  const Json turns = script.value("turns", Json::array());
  if (!turns.is_array()) diags.push_back(error_at(checks::kSchemaStructure, "turns", "expected a list"));
  std::size_t i = 0;
  for (const auto& t : turns.is_array() ? turns : Json::array()) {
    const auto where = "turns[" + std::to_string(i++) + "]";
    if (!t.is_object()) {
      diags.push_back(error_at(checks::kSchemaStructure, where, "expected an object"));
      continue;
    }
    for (const auto& [key, value] : t.items()) {
      if (!kTurnKeys.count(key)) diags.push_back(error_at(checks::kSchemaStructure, where + "." + key, "unknown field"));
    }
    if (t.contains("say") && !t["say"].is_string()) {
      diags.push_back(error_at(checks::kSchemaStructure, where + ".say", "expected a string"));
    }
    if (t.contains("expect")) {
      if (!t["expect"].is_object()) {
        diags.push_back(error_at(checks::kSchemaStructure, where + ".expect", "expected an object"));
      } else {
        for (const auto& [key, value] : t["expect"].items()) {
          if (!kExpectKeys.count(key)) {
            diags.push_back(error_at(checks::kSchemaStructure, where + ".expect." + key, "unknown expectation"));
          }
        }
      }
    }
  }
  if (!diags.empty()) throw InvalidDocument("malformed session script", std::move(diags));
  ScriptedPlanner::from_document(script.value("planner", Json::array()));
}

ReplayResult replay_session(const Json& script, Gate& gate) {
  check_script(script);
  Replayer replayer(gate, ScriptedPlanner::from_document(script.value("planner", Json::array())));
  return replayer.run(script.value("turns", Json::array()));
}

std::string render_replay_table(const ReplayResult& result) {
  const std::vector<std::string> header = {"Turn", "Actor", "Action / Tool Call", "Detail", "Schema Gate"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : result.rows) {
    cells.push_back({std::to_string(r.turn) + (r.ok ? "" : " !"), r.actor, r.action, r.detail, r.gate});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], std::min<std::size_t>(row[c].size(), 72));
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      auto cell = row[c].size() > 72 ? row[c].substr(0, 69) + "..." : row[c];
      out += cell;
      if (c + 1 < row.size()) out += std::string(width[c] - cell.size() + 2, ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + "\n";
  for (const auto& row : cells) out += line(row);
  out += result.passed ? "replay completed: " + std::to_string(result.rows.size()) + " turns, " +
                             std::to_string(result.run_ids.size()) + " runs\n"
                       : "replay diverged at " + *result.divergence + "\n";
  return out;
}

Json to_document(const ReplayResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"turn", r.turn}, {"actor", r.actor}, {"action", r.action}, {"detail", r.detail},
                    {"gate", r.gate}, {"ok", r.ok}});
  }
  return {{"session_id", result.session_id},
          {"passed", result.passed},
          {"divergence", result.divergence ? Json(*result.divergence) : Json(nullptr)},
          {"run_ids", result.run_ids},
          {"rows", std::move(rows)}};
}

}  // namespace schemagate
