#include "schemagate/gate.hpp"

#include <regex>

#include "schemagate/digest.hpp"
#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/fsutil.hpp"
#include "schemagate/validation.hpp"
#include "schemagate/values.hpp"

namespace schemagate {

namespace {

// Argument schemas of the platform actions, in the workflow parameter format.
constexpr const char* kPlatformActions = R"({
  "search_workflows": {
    "query": {"type": "string", "required": true, "description": "Free-text query"},
    "tags": {"type": "list[str]", "required": false, "description": "Tags every hit must carry"}
  },
  "get_parameters": {
    "workflow_id": {"type": "string", "required": true, "description": "Workflow to describe",
                    "validation_rules": {"not_empty": true}},
    "version": {"type": "string", "required": false, "description": "Semantic version; latest when absent"}
  },
  "list_datasets": {},
  "execute_workflow": {
    "workflow_id": {"type": "string", "required": true, "description": "Workflow to invoke",
                    "validation_rules": {"not_empty": true}},
    "version": {"type": "string", "required": false, "description": "Semantic version; latest when absent"},
    "parameters": {"type": "dict", "required": false, "description": "Workflow-level parameter values"}
  }
})";

std::string digest_of(const Json& doc) { return sha256_hex(render_document(doc)); }

std::optional<SemVer> version_argument(const Json& arguments) {
  if (!arguments.contains("version") || arguments["version"].is_null()) return std::nullopt;
  return SemVer::parse(arguments["version"].get<std::string>());
}

Json apply_updates(Json parameters, const Json& updates) {
  for (const auto& [key, value] : updates.items()) {
    if (value.is_null()) {
      parameters.erase(key);
    } else {
      parameters[key] = value;
    }
  }
  return parameters;
}

void require_known(const WorkflowDefinition& wf, const Json& parameters) {
  if (!parameters.is_object()) {
    throw InvalidDocument("parameters must be an object",
                          {error_at(checks::kSchemaStructure, "parameters", "expected an object")});
  }
  std::string unknown;
  for (const auto& [key, value] : parameters.items()) {
    if (find_parameter(wf.parameters, key)) continue;
    unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw UnknownParameter("workflow '" + wf.workflow_id + "' has no parameter(s): " + unknown);
  }
}

PromptReason reason_for(std::string_view check) {
  if (check == checks::kRequired) return PromptReason::kMissing;
  if (check == checks::kTypeMismatch) return PromptReason::kTypeMismatch;
  return PromptReason::kConstraintViolation;
}

Json diagnostics_document(const Diagnostics& diagnostics) { return to_document(diagnostics); }

}  // namespace

const InvocationObject* SessionContext::pending() const {
  if (!pending_invocation) return nullptr;
  auto it = invocations.find(*pending_invocation);
  return it == invocations.end() ? nullptr : &it->second;
}

Json action_log_document(const SessionContext& session) {
  Json log = Json::array();
  for (const auto& e : session.action_log) {
    log.push_back({{"action", e.action}, {"arguments", e.arguments}, {"outcome", e.outcome},
                   {"result_digest", e.result_digest}});
  }
  return log;
}

Json to_document(const SessionContext& session) {
  Json doc = Json::object();
  doc["session_id"] = session.session_id;
  Json messages = Json::array();
  for (const auto& m : session.messages) messages.push_back({{"role", m.role}, {"text", m.text}});
  doc["messages"] = std::move(messages);
  doc["action_log"] = action_log_document(session);
  const auto* pending = session.pending();
  doc["pending_invocation"] = pending ? to_document(*pending) : Json(nullptr);
  doc["last_run_ids"] = session.last_run_ids;
  doc["turn_consultations"] = session.turn_consultations;
  if (session.selected_workflow) {
    doc["selected_workflow"] = {{"workflow_id", session.selected_workflow->workflow_id},
                                {"version", session.selected_workflow->version
                                                ? Json(session.selected_workflow->version->str())
                                                : Json(nullptr)}};
  } else {
    doc["selected_workflow"] = nullptr;
  }
  Json invocations = Json::array();
  for (const auto& [id, inv] : session.invocations) invocations.push_back(to_document(inv));
  doc["invocations"] = std::move(invocations);
  return doc;
}

std::string_view prompt_reason_name(PromptReason reason) {
  switch (reason) {
    case PromptReason::kMissing:
      return "missing";
    case PromptReason::kTypeMismatch:
      return "type_mismatch";
    case PromptReason::kConstraintViolation:
      return "constraint_violation";
  }
  return "missing";
}

Json to_document(const ClarificationPrompt& prompt) {
  return {{"parameter", prompt.parameter},
          {"reason", prompt_reason_name(prompt.reason)},
          {"expected", prompt.expected},
          {"message", prompt.message}};
}

Json to_document(const std::vector<ClarificationPrompt>& prompts) {
  Json out = Json::array();
  for (const auto& p : prompts) out.push_back(to_document(p));
  return out;
}

std::vector<ClarificationPrompt> parameter_prompts(const WorkflowDefinition& workflow, const Json& parameters) {
  std::vector<ClarificationPrompt> prompts;
  for (const auto& p : workflow.parameters) {
    Json value = parameters.contains(p.name) ? parameters[p.name] : Json(nullptr);
    if (value.is_null() && p.default_value) continue;
    auto diags = validate_value(value, p, p.name);
    auto first = std::find_if(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::kError; });
    if (first == diags.end()) continue;
    ClarificationPrompt prompt;
    prompt.parameter = p.name;
    prompt.reason = reason_for(first->check);
    prompt.expected = describe_expectation(p);
    switch (prompt.reason) {
      case PromptReason::kMissing:
        prompt.message = "Please provide " + p.name + (p.description.empty() ? "" : " (" + p.description + ")");
        break;
      case PromptReason::kTypeMismatch:
        prompt.message = p.name + " has the wrong type; expected " + prompt.expected;
        break;
      case PromptReason::kConstraintViolation:
        prompt.message = p.name + ": " + first->message;
        break;
    }
    prompts.push_back(std::move(prompt));
  }
  return prompts;
}

// ---------------------------------------------------------------- planner

Json to_document(const PlannerDecision& decision) {
  Json doc = Json::object();
  doc["assistant_message"] = decision.assistant_message;
  if (decision.proposed_action) {
    doc["proposed_action"] = {{"action", decision.proposed_action->action},
                              {"arguments", decision.proposed_action->arguments}};
  } else {
    doc["proposed_action"] = nullptr;
  }
  return doc;
}

PlannerDecision decision_from_document(const Json& document) {
  Diagnostics diags;
  PlannerDecision out;
  if (!document.is_object()) {
    throw InvalidDocument("planner decision must be an object",
                          {error_at(checks::kSchemaStructure, "decision", "expected an object")});
  }
  for (const auto& [key, value] : document.items()) {
    if (key != "assistant_message" && key != "proposed_action") {
      diags.push_back(error_at(checks::kSchemaStructure, "decision." + key, "unknown field"));
    }
  }
  if (document.contains("assistant_message")) {
    if (document["assistant_message"].is_string()) {
      out.assistant_message = document["assistant_message"].get<std::string>();
    } else {
      diags.push_back(error_at(checks::kSchemaStructure, "decision.assistant_message", "expected a string"));
    }
  }
  if (document.contains("proposed_action") && !document["proposed_action"].is_null()) {
    const auto& pa = document["proposed_action"];
    if (!pa.is_object() || !pa.contains("action") || !pa["action"].is_string()) {
      diags.push_back(error_at(checks::kSchemaStructure, "decision.proposed_action",
                               "expected an object with a string 'action'"));
    } else {
      ProposedAction action;
      action.action = pa["action"].get<std::string>();
      if (pa.contains("arguments")) action.arguments = pa["arguments"];
      out.proposed_action = std::move(action);
    }
  }
  if (!diags.empty()) throw InvalidDocument("malformed planner decision", std::move(diags));
  return out;
}

ScriptedPlanner ScriptedPlanner::from_document(const Json& document) {
  const Json* rules = &document;
  if (document.is_object() && document.contains("planner")) rules = &document["planner"];
  if (!rules->is_array()) {
    throw InvalidDocument("planner script must be a list of rules",
                          {error_at(checks::kSchemaStructure, "planner", "expected a list")});
  }
  std::vector<Rule> out;
  std::size_t i = 0;
  for (const auto& r : *rules) {
    const auto where = "planner[" + std::to_string(i++) + "]";
    if (!r.is_object()) {
      throw InvalidDocument("planner rule must be an object", {error_at(checks::kSchemaStructure, where, "expected an object")});
    }
    Rule rule;
    if (r.contains("match")) rule.exact = r["match"].get<std::string>();
    if (r.contains("pattern")) {
      rule.pattern = r["pattern"].get<std::string>();
      try {
        std::regex check(*rule.pattern);
      } catch (const std::regex_error& e) {
        throw InvalidDocument("bad pattern", {error_at(checks::kSchemaStructure, where + ".pattern", e.what())});
      }
    }
    if (!rule.exact && !rule.pattern) {
      throw InvalidDocument("planner rule needs match or pattern",
                            {error_at(checks::kSchemaStructure, where, "missing 'match' or 'pattern'")});
    }
    if (r.contains("decision")) rule.decisions.push_back(decision_from_document(r["decision"]));
    for (const auto& d : r.value("decisions", Json::array())) rule.decisions.push_back(decision_from_document(d));
    out.push_back(std::move(rule));
  }
  return ScriptedPlanner(std::move(out));
}

ScriptedPlanner ScriptedPlanner::from_file(const std::filesystem::path& path) {
  return from_document(Json::parse(read_file(path)));
}

PlannerDecision ScriptedPlanner::decide(const SessionContext& context) {
  const Message* last = nullptr;
  for (auto it = context.messages.rbegin(); it != context.messages.rend(); ++it) {
    if (it->role == "user") {
      last = &*it;
      break;
    }
  }
  if (!last) return {};
  const auto consulted = context.turn_consultations;
  for (const auto& rule : rules_) {
    bool hit = rule.exact ? *rule.exact == last->text : std::regex_match(last->text, std::regex(*rule.pattern));
    if (!hit) continue;
    if (consulted < rule.decisions.size()) return rule.decisions[consulted];
    return {};
  }
  return {"I could not map that request to a platform action.", std::nullopt};
}

// ---------------------------------------------------------------- platform actions

const std::map<std::string, ParameterSchema>& platform_actions() {
  static const auto actions = [] {
    std::map<std::string, ParameterSchema> out;
    const auto schemas = Json::parse(kPlatformActions);
    for (const auto& [name, doc] : schemas.items()) {
      auto parsed = parse_parameter_schema(doc, name);
      if (!parsed) throw std::logic_error("built-in action schema for " + name + " is invalid");
      out[name] = parsed.value();
    }
    return out;
  }();
  return actions;
}

bool is_read_only_action(std::string_view action) {
  return action == "search_workflows" || action == "get_parameters" || action == "list_datasets";
}

Diagnostics check_action_arguments(const std::string& action, const Json& arguments) {
  const auto& actions = platform_actions();
  auto it = actions.find(action);
  if (it == actions.end()) {
    return {error_at(checks::kSchemaStructure, "action", "unknown platform action '" + action + "'")};
  }
  if (!arguments.is_object()) {
    return {error_at(checks::kSchemaStructure, action + ".arguments", "expected an object")};
  }
  Diagnostics diags;
  for (const auto& [key, value] : arguments.items()) {
    if (!find_parameter(it->second, key)) {
      diags.push_back(error_at(checks::kUnknownParameter, action + "." + key, "unknown argument"));
    }
  }
  for (const auto& p : it->second) {
    Json value = arguments.contains(p.name) ? arguments[p.name] : Json(nullptr);
    for (auto& d : validate_value(value, p, action + "." + p.name)) diags.push_back(std::move(d));
  }
  if (arguments.contains("version") && arguments["version"].is_string() &&
      !SemVer::parse(arguments["version"].get<std::string>())) {
    diags.push_back(error_at(checks::kVersionFormat, action + ".version", "not a semantic version"));
  }
  return diags;
}

Json to_document(const Proposal& proposal) {
  return {{"invocation", to_document(proposal.invocation)},
          {"prompts", to_document(proposal.prompts)},
          {"workflow_diagnostics", diagnostics_document(proposal.workflow_diagnostics)}};
}

Json to_document(const StepOutcome& outcome) {
  Json doc = Json::object();
  doc["assistant_messages"] = outcome.assistant_messages;
  Json actions = Json::array();
  for (const auto& a : outcome.actions) {
    actions.push_back({{"action", a.action}, {"arguments", a.arguments}, {"result", a.result}});
  }
  doc["actions"] = std::move(actions);
  doc["proposal"] = outcome.proposal ? to_document(*outcome.proposal) : Json(nullptr);
  if (outcome.refusal) {
    doc["refusal"] = {{"code", outcome.refusal->code},
                      {"message", outcome.refusal->message},
                      {"diagnostics", diagnostics_document(outcome.refusal->diagnostics)}};
  } else {
    doc["refusal"] = nullptr;
  }
  return doc;
}

// ---------------------------------------------------------------- gate

Gate::Gate(Registry& registry, Executor& executor, std::shared_ptr<Clock> clock, std::shared_ptr<IdSource> ids,
           GateOptions options)
    : registry_(registry),
      executor_(executor),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      ids_(ids ? std::move(ids) : std::make_shared<RandomIdSource>()),
      options_(std::move(options)) {}

std::string Gate::open_session() {
  auto s = std::make_unique<Slot>();
  s->ctx.session_id = ids_->next_uuid();
  auto id = s->ctx.session_id;
  std::unique_lock lock(sessions_mu_);
  sessions_.emplace(id, std::move(s));
  return id;
}

Gate::Slot& Gate::slot(const std::string& session_id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("session '" + session_id + "' does not exist");
  return *it->second;
}

SessionContext Gate::session(const std::string& session_id) const {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return s.ctx;
}

std::size_t Gate::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

void Gate::log(SessionContext& ctx, std::string action, Json arguments, const Json& result, std::string outcome) {
  ctx.action_log.push_back({std::move(action), std::move(arguments), digest_of(result), std::move(outcome)});
}

Json Gate::execute_read_action(const std::string& action, const Json& arguments) const {
  auto diags = check_action_arguments(action, arguments);
  if (has_errors(diags)) throw ActionArgumentError("arguments of '" + action + "' are invalid", std::move(diags));
  if (!is_read_only_action(action)) {
    throw ActionArgumentError("'" + action + "' is not a read-only action",
                              {error_at(checks::kSchemaStructure, "action", "not read-only")});
  }
  if (action == "search_workflows") {
    std::vector<std::string> tags;
    if (arguments.contains("tags")) tags = arguments["tags"].get<std::vector<std::string>>();
    Json results = Json::array();
    for (const auto& h : registry_.search_workflows(arguments["query"].get<std::string>(), tags)) {
      results.push_back({{"workflow_id", h.workflow_id}, {"version", h.version.str()}, {"name", h.name},
                         {"score", h.score}});
    }
    return {{"results", std::move(results)}};
  }
  if (action == "get_parameters") {
    auto wf = registry_.resolve_workflow(arguments["workflow_id"].get<std::string>(), version_argument(arguments));
    return {{"workflow_id", wf.workflow_id},
            {"version", wf.version.str()},
            {"parameters", parameter_schema_document(wf.parameters)}};
  }
  Json datasets = Json::array();
  for (const auto& d : registry_.datasets().list()) datasets.push_back(to_document(d));
  return {{"datasets", std::move(datasets)}};
}

StepOutcome Gate::step(const std::string& session_id, const std::string& user_message, Planner& planner) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  auto& ctx = s.ctx;
  ctx.messages.push_back({"user", user_message});
  ctx.turn_consultations = 0;
  StepOutcome outcome;

  auto refuse = [&](const std::string& action, const Json& arguments, std::string code, std::string message,
                    Diagnostics diags) {
    Refusal r{std::move(code), std::move(message), std::move(diags)};
    Json doc = {{"code", r.code}, {"message", r.message}, {"diagnostics", diagnostics_document(r.diagnostics)}};
    log(ctx, action, arguments, doc, "refused");
    std::string text = "Refused " + action + ": " + r.message;
    for (const auto& d : r.diagnostics) text += "\n" + render_diagnostic(d);
    ctx.messages.push_back({"system", text});
    outcome.refusal = std::move(r);
  };

  for (int i = 0; i < options_.max_actions_per_turn; ++i) {
    auto decision = planner.decide(ctx);
    ++ctx.turn_consultations;
    if (!decision.assistant_message.empty()) {
      ctx.messages.push_back({"assistant", decision.assistant_message});
      outcome.assistant_messages.push_back(decision.assistant_message);
    }
    if (!decision.proposed_action) break;
    const auto& [action, arguments] = *decision.proposed_action;
    auto diags = check_action_arguments(action, arguments);
    if (has_errors(diags)) {
      refuse(action, arguments, "ActionArgumentError", "arguments do not match the action schema", std::move(diags));
      break;
    }
    try {
      if (is_read_only_action(action)) {
        auto result = execute_read_action(action, arguments);
        log(ctx, action, arguments, result, "executed");
        ctx.messages.push_back({"system", action + " -> " + result.dump()});
        outcome.actions.push_back({action, arguments, std::move(result)});
        continue;
      }
      // execute_workflow never dispatches: it proposes, clarifies or amends.
      const auto workflow_id = arguments["workflow_id"].get<std::string>();
      const auto version = version_argument(arguments);
      const Json parameters = arguments.value("parameters", Json::object());
      const auto* pending = ctx.pending();
      Proposal proposal;
      std::string routed;
      if (pending && pending->workflow_id == workflow_id && (!version || *version == pending->version)) {
        if (pending->state == InvocationState::kDispatched) {
          proposal = amend_locked(ctx, pending->invocation_id, parameters);
          routed = "amend_invocation";
        } else {
          proposal = clarify_locked(ctx, pending->invocation_id, parameters);
          routed = "clarify";
        }
      } else {
        proposal = propose_locked(ctx, workflow_id, version, parameters, std::nullopt);
        routed = "propose_invocation";
      }
      ctx.action_log.back().action = action;
      ctx.action_log.back().arguments = arguments;
      ctx.action_log.back().outcome = routed;
      std::string text = "Invocation " + proposal.invocation.invocation_id + " is " +
                         std::string(state_name(proposal.invocation.state));
      for (const auto& p : proposal.prompts) text += "\n" + p.message;
      ctx.messages.push_back({"system", text});
      outcome.proposal = std::move(proposal);
      break;
    } catch (const DiagnosticError& e) {
      refuse(action, arguments, e.code(), e.what(), e.diagnostics());
      break;
    } catch (const Error& e) {
      refuse(action, arguments, e.code(), e.what(), {});
      break;
    }
  }
  return outcome;
}

void Gate::select_workflow(const std::string& session_id, const std::string& workflow_id,
                           const std::optional<SemVer>& version) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  auto wf = registry_.resolve_workflow(workflow_id, version);
  s.ctx.selected_workflow = SelectedWorkflow{workflow_id, version};
  Json args = {{"workflow_id", workflow_id}, {"version", version ? Json(version->str()) : Json(nullptr)}};
  log(s.ctx, "select_workflow", args, {{"workflow_id", wf.workflow_id}, {"version", wf.version.str()}}, "executed");
  s.ctx.messages.push_back({"system", "selected " + wf.workflow_id + " " + wf.version.str()});
}

Proposal Gate::revalidate_locked(SessionContext& ctx, InvocationObject& inv) const {
  (void)ctx;
  auto wf = registry_.resolve_workflow(inv.workflow_id, inv.version);
  Proposal out;
  out.prompts = parameter_prompts(wf, inv.parameters);
  auto report = validate_workflow(wf, registry_);
  for (const auto& d : report.diagnostics()) {
    if (d.severity == Severity::kError) out.workflow_diagnostics.push_back(d);
  }
  if (inv.state == InvocationState::kDraft && out.prompts.empty() && report.valid) {
    inv.advance(InvocationState::kValidated);
  }
  out.invocation = inv;
  return out;
}

Proposal Gate::propose_locked(SessionContext& ctx, const std::string& workflow_id,
                              const std::optional<SemVer>& version, const Json& parameters,
                              const std::optional<std::string>& parent) {
  auto wf = registry_.resolve_workflow(workflow_id, version);
  require_known(wf, parameters);
  InvocationObject inv;
  inv.invocation_id = ids_->next_uuid();
  inv.workflow_id = wf.workflow_id;
  inv.version = wf.version;
  inv.parameters = apply_updates(Json::object(), parameters);
  inv.created_at = clock_->now();
  inv.parent_invocation = parent;
  auto proposal = revalidate_locked(ctx, inv);
  ctx.invocations[inv.invocation_id] = inv;
  ctx.pending_invocation = inv.invocation_id;
  Json args = {{"workflow_id", workflow_id},
               {"version", version ? Json(version->str()) : Json(nullptr)},
               {"parameters", parameters}};
  if (parent) args["parent_invocation"] = *parent;
  log(ctx, parent ? "amend_invocation" : "propose_invocation", std::move(args), to_document(proposal),
      std::string(state_name(inv.state)));
  return proposal;
}

InvocationObject& Gate::invocation_locked(SessionContext& ctx, const std::string& invocation_id) const {
  auto it = ctx.invocations.find(invocation_id);
  if (it == ctx.invocations.end()) {
    throw NotFound("invocation '" + invocation_id + "' is not part of session " + ctx.session_id);
  }
  return it->second;
}

Proposal Gate::clarify_locked(SessionContext& ctx, const std::string& invocation_id, const Json& updates) {
  auto& inv = invocation_locked(ctx, invocation_id);
  if (inv.state == InvocationState::kDispatched) {
    throw InvalidState("invocation " + invocation_id + " was dispatched; amend it instead");
  }
  auto wf = registry_.resolve_workflow(inv.workflow_id, inv.version);
  require_known(wf, updates);
  auto next = apply_updates(inv.parameters, updates);
  InvocationObject work = inv;
  if (next != work.parameters) {
    work.parameters = std::move(next);
    work.reset();
  }
  auto proposal = revalidate_locked(ctx, work);
  inv = work;
  ctx.pending_invocation = invocation_id;
  log(ctx, "clarify", {{"invocation_id", invocation_id}, {"parameters", updates}}, to_document(proposal),
      std::string(state_name(inv.state)));
  return proposal;
}

Proposal Gate::amend_locked(SessionContext& ctx, const std::string& prior_id, const Json& overrides) {
  const auto prior = invocation_locked(ctx, prior_id);
  auto wf = registry_.resolve_workflow(prior.workflow_id, prior.version);
  require_known(wf, overrides);
  return propose_locked(ctx, prior.workflow_id, prior.version, apply_updates(prior.parameters, overrides), prior_id);
}

InvocationObject Gate::approve_locked(SessionContext& ctx, const std::string& invocation_id) {
  auto& inv = invocation_locked(ctx, invocation_id);
  switch (inv.state) {
    case InvocationState::kDraft:
      throw NotValidated("invocation " + invocation_id + " has not passed validation");
    case InvocationState::kApproved:
    case InvocationState::kDispatched:
      return inv;
    case InvocationState::kValidated:
      break;
  }
  inv.advance(InvocationState::kApproved);
  const auto at = clock_->now();
  log(ctx, "approve", {{"invocation_id", invocation_id}, {"approver", options_.approver}, {"timestamp", at}},
      to_document(inv), "approved");
  return inv;
}

std::string Gate::dispatch_locked(SessionContext& ctx, const std::string& invocation_id) {
  auto& inv = invocation_locked(ctx, invocation_id);
  if (inv.state == InvocationState::kValidated && options_.auto_approve) approve_locked(ctx, invocation_id);
  switch (inv.state) {
    case InvocationState::kDraft:
      throw NotValidated("invocation " + invocation_id + " has not passed validation");
    case InvocationState::kValidated:
      throw NotApproved("invocation " + invocation_id + " is validated but not approved");
    case InvocationState::kDispatched:
      throw InvalidState("invocation " + invocation_id + " was already dispatched");
    case InvocationState::kApproved:
      break;
  }

  // Defence in depth: the registry may have changed since approval.
  registry_.refresh();
  WorkflowDefinition snapshot;
  try {
    snapshot = registry_.resolve_workflow(inv.workflow_id, inv.version);
  } catch (const Error& e) {
    throw GateRegression("workflow " + inv.workflow_id + " " + inv.version.str() + " is no longer published",
                         {error_at(checks::kToolAvailability, inv.workflow_id, e.what())});
  }
  Diagnostics regressions;
  for (const auto& p : snapshot.parameters) {
    Json value = inv.parameters.contains(p.name) ? inv.parameters[p.name] : Json(nullptr);
    if (value.is_null() && p.default_value) continue;
    for (auto& d : validate_value(value, p, p.name)) {
      if (d.severity == Severity::kError) regressions.push_back(std::move(d));
    }
  }
  for (const auto& d : validate_workflow(snapshot, registry_).diagnostics()) {
    if (d.severity == Severity::kError) regressions.push_back(d);
  }
  if (!regressions.empty()) {
    log(ctx, "dispatch", {{"invocation_id", invocation_id}}, diagnostics_document(regressions), "refused");
    throw GateRegression("invocation " + invocation_id + " no longer validates", std::move(regressions));
  }

  InvocationObject submitted = inv;
  submitted.advance(InvocationState::kDispatched);
  std::string run_id;
  try {
    run_id = executor_.execute(submitted, snapshot);
  } catch (const AdapterMissing& e) {
    throw ExecutorUnavailable(e.what());
  }
  inv = submitted;
  ctx.last_run_ids.push_back(run_id);
  ctx.pending_invocation = invocation_id;
  log(ctx, "dispatch", {{"invocation_id", invocation_id}}, {{"run_id", run_id}}, "dispatched");
  ctx.messages.push_back({"system", "dispatched " + invocation_id + " as run " + run_id});
  return run_id;
}

Proposal Gate::propose(const std::string& session_id, const std::string& workflow_id,
                       const std::optional<SemVer>& version, const Json& parameters) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return propose_locked(s.ctx, workflow_id, version, parameters, std::nullopt);
}

Proposal Gate::clarify(const std::string& session_id, const std::string& invocation_id, const std::string& parameter,
                       const Json& value) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  Json updates = Json::object();
  updates[parameter] = value;
  return clarify_locked(s.ctx, invocation_id, updates);
}

Proposal Gate::clarify(const std::string& session_id, const std::string& invocation_id, const Json& updates) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return clarify_locked(s.ctx, invocation_id, updates);
}

Proposal Gate::amend(const std::string& session_id, const std::string& prior_invocation_id, const Json& overrides) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return amend_locked(s.ctx, prior_invocation_id, overrides);
}

InvocationObject Gate::approve(const std::string& session_id, const std::string& invocation_id) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return approve_locked(s.ctx, invocation_id);
}

std::string Gate::dispatch(const std::string& session_id, const std::string& invocation_id) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return dispatch_locked(s.ctx, invocation_id);
}

InvocationObject Gate::invocation(const std::string& session_id, const std::string& invocation_id) const {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  return invocation_locked(s.ctx, invocation_id);
}

Proposal Gate::inspect(const std::string& session_id, const std::string& invocation_id) const {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  auto inv = invocation_locked(s.ctx, invocation_id);
  auto wf = registry_.resolve_workflow(inv.workflow_id, inv.version);
  Proposal out;
  out.invocation = inv;
  out.prompts = parameter_prompts(wf, inv.parameters);
  for (const auto& d : validate_workflow(wf, registry_).diagnostics()) {
    if (d.severity == Severity::kError) out.workflow_diagnostics.push_back(d);
  }
  return out;
}

void Gate::record_run_result(const std::string& session_id, const RunRecord& run) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mu);
  Json metrics = Json::object();
  for (const auto& step : run.steps) {
    if (step.metrics) metrics[step.step_id] = *step.metrics;
  }
  Json result = {{"run_id", run.run_id}, {"status", run_status_name(run.status)}, {"metrics", metrics}};
  log(s.ctx, "run_result", {{"run_id", run.run_id}}, result, std::string(run_status_name(run.status)));
  s.ctx.messages.push_back({"system", "run " + run.run_id + " " + std::string(run_status_name(run.status))});
}

}  // namespace schemagate
