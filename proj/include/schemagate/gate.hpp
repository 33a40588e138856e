#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "schemagate/clock.hpp"
#include "schemagate/diagnostic.hpp"
#include "schemagate/executor.hpp"
#include "schemagate/invocation.hpp"
#include "schemagate/registry.hpp"

namespace schemagate {

struct Message {
  std::string role;  // user, assistant, system
  std::string text;
};

struct ActionLogEntry {
  std::string action;
  Json arguments = Json::object();
  /// sha256 of the canonical result document, or of the refusal.
  std::string result_digest;
  /// executed, refused, proposed, approved, dispatched, ...
  std::string outcome;
};

struct SelectedWorkflow {
  std::string workflow_id;
  std::optional<SemVer> version;
};

struct SessionContext {
  std::string session_id;
  std::vector<Message> messages;
  std::vector<ActionLogEntry> action_log;
  std::optional<std::string> pending_invocation;
  std::vector<std::string> last_run_ids;
  std::optional<SelectedWorkflow> selected_workflow;
  /// Every invocation the session has produced, by id.
  std::map<std::string, InvocationObject> invocations;
  /// Planner decisions obtained since the latest user message.
  std::size_t turn_consultations = 0;

  const InvocationObject* pending() const;
};

Json to_document(const SessionContext& session);
Json action_log_document(const SessionContext& session);

enum class PromptReason { kMissing, kTypeMismatch, kConstraintViolation };
std::string_view prompt_reason_name(PromptReason reason);

struct ClarificationPrompt {
  std::string parameter;
  PromptReason reason = PromptReason::kMissing;
  std::string expected;
  std::string message;

  bool operator==(const ClarificationPrompt&) const = default;
};

Json to_document(const ClarificationPrompt& prompt);
Json to_document(const std::vector<ClarificationPrompt>& prompts);

/// One prompt per defective parameter, in schema declaration order.
std::vector<ClarificationPrompt> parameter_prompts(const WorkflowDefinition& workflow, const Json& parameters);

struct ProposedAction {
  std::string action;
  Json arguments = Json::object();
};

struct PlannerDecision {
  std::string assistant_message;
  std::optional<ProposedAction> proposed_action;
};

Json to_document(const PlannerDecision& decision);
/// Throws InvalidDocument when the shape is wrong. The action name and its
/// arguments are not checked here; the gate does that.
PlannerDecision decision_from_document(const Json& document);

class Planner {
 public:
  virtual ~Planner() = default;
  virtual PlannerDecision decide(const SessionContext& context) = 0;
};

/// Decisions looked up from the latest user message. A rule lists the
/// decisions for successive consultations within one user turn; once they
/// run out the planner proposes nothing.
class ScriptedPlanner final : public Planner {
 public:
  struct Rule {
    std::optional<std::string> exact;
    std::optional<std::string> pattern;  // ECMAScript regex, full match
    std::vector<PlannerDecision> decisions;
  };

  explicit ScriptedPlanner(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  /// Accepts a rule array or an object with a "planner" array.
  static ScriptedPlanner from_document(const Json& document);
  static ScriptedPlanner from_file(const std::filesystem::path& path);

  PlannerDecision decide(const SessionContext& context) override;

 private:
  std::vector<Rule> rules_;
};

/// The closed set of platform actions and their argument schemas.
const std::map<std::string, ParameterSchema>& platform_actions();
bool is_read_only_action(std::string_view action);
/// Unknown actions, unknown or missing arguments and ill-typed values.
Diagnostics check_action_arguments(const std::string& action, const Json& arguments);

struct Proposal {
  InvocationObject invocation;
  std::vector<ClarificationPrompt> prompts;
  /// Errors of the workflow's own validation report, when it has regressed.
  Diagnostics workflow_diagnostics;
};

Json to_document(const Proposal& proposal);

struct ActionResult {
  std::string action;
  Json arguments = Json::object();
  Json result;
};

struct Refusal {
  std::string code;
  std::string message;
  Diagnostics diagnostics;
};

struct StepOutcome {
  std::vector<std::string> assistant_messages;
  std::vector<ActionResult> actions;
  std::optional<Proposal> proposal;
  std::optional<Refusal> refusal;
};

Json to_document(const StepOutcome& outcome);

struct GateOptions {
  /// Off by default: dispatch needs an explicit approve().
  bool auto_approve = false;
  std::string approver = "user";
  /// Planner consultations per user message.
  int max_actions_per_turn = 8;
};

/// The orchestration controller. Owns sessions and is the only component
/// that hands invocations to the executor (dispatch).
class Gate {
 public:
  Gate(Registry& registry, Executor& executor, std::shared_ptr<Clock> clock = nullptr,
       std::shared_ptr<IdSource> ids = nullptr, GateOptions options = {});

  std::string open_session();
  SessionContext session(const std::string& session_id) const;
  std::size_t session_count() const;

  StepOutcome step(const std::string& session_id, const std::string& user_message, Planner& planner);
  void select_workflow(const std::string& session_id, const std::string& workflow_id,
                       const std::optional<SemVer>& version = {});

  Proposal propose(const std::string& session_id, const std::string& workflow_id,
                   const std::optional<SemVer>& version, const Json& parameters);
  Proposal clarify(const std::string& session_id, const std::string& invocation_id, const std::string& parameter,
                   const Json& value);
  /// Several parameters in one round; null values unset.
  Proposal clarify(const std::string& session_id, const std::string& invocation_id, const Json& updates);
  Proposal amend(const std::string& session_id, const std::string& prior_invocation_id, const Json& overrides);
  InvocationObject approve(const std::string& session_id, const std::string& invocation_id);
  /// Approved invocations only. Re-validates against the current registry.
  std::string dispatch(const std::string& session_id, const std::string& invocation_id);

  InvocationObject invocation(const std::string& session_id, const std::string& invocation_id) const;
  /// Current prompts of an invocation against its workflow.
  Proposal inspect(const std::string& session_id, const std::string& invocation_id) const;
  /// Appends a run's outcome to the session context.
  void record_run_result(const std::string& session_id, const RunRecord& run);

  /// Runs a read-only platform action. Throws ActionArgumentError on bad
  /// arguments and NotFound/Retired from the registry.
  Json execute_read_action(const std::string& action, const Json& arguments) const;

  Registry& registry() noexcept { return registry_; }
  Executor& executor() noexcept { return executor_; }

 private:
  struct Slot {
    mutable std::mutex mu;
    SessionContext ctx;
  };

  Slot& slot(const std::string& session_id) const;
  Proposal propose_locked(SessionContext& ctx, const std::string& workflow_id, const std::optional<SemVer>& version,
                          const Json& parameters, const std::optional<std::string>& parent);
  Proposal revalidate_locked(SessionContext& ctx, InvocationObject& inv) const;
  Proposal clarify_locked(SessionContext& ctx, const std::string& invocation_id, const Json& updates);
  Proposal amend_locked(SessionContext& ctx, const std::string& prior_id, const Json& overrides);
  InvocationObject approve_locked(SessionContext& ctx, const std::string& invocation_id);
  std::string dispatch_locked(SessionContext& ctx, const std::string& invocation_id);
  InvocationObject& invocation_locked(SessionContext& ctx, const std::string& invocation_id) const;
  void log(SessionContext& ctx, std::string action, Json arguments, const Json& result, std::string outcome);

  Registry& registry_;
  Executor& executor_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<IdSource> ids_;
  GateOptions options_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::unique_ptr<Slot>> sessions_;
};

}  // namespace schemagate
