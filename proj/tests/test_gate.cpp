#include <gtest/gtest.h>

#include <set>

#include "schemagate/documents.hpp"
#include "schemagate/replay.hpp"
#include "schemagate/values.hpp"
#include "support/gate_harness.hpp"

using namespace schemagate;
using testsupport::alloy_block;
using testsupport::Gen;
using testsupport::GateEnv;
using testsupport::ValuePool;

namespace {

std::vector<std::string> prompt_names(const Proposal& p) {
  std::vector<std::string> out;
  for (const auto& prompt : p.prompts) out.push_back(prompt.parameter);
  return out;
}

PlannerDecision act(std::string action, Json arguments) {
  return {"", ProposedAction{std::move(action), std::move(arguments)}};
}

class FixedPlanner final : public Planner {
 public:
  explicit FixedPlanner(std::vector<PlannerDecision> decisions) : decisions_(std::move(decisions)) {}
  PlannerDecision decide(const SessionContext&) override {
    if (next_ >= decisions_.size()) return {};
    return decisions_[next_++];
  }

 private:
  std::vector<PlannerDecision> decisions_;
  std::size_t next_ = 0;
};

class DownPlanner final : public Planner {
 public:
  PlannerDecision decide(const SessionContext&) override { throw PlannerUnavailable("connection refused"); }
};

std::string validated_alloy(Gate& gate, const std::string& sid) {
  auto p = gate.propose(sid, "alloy_inverse_design", std::nullopt, alloy_block());
  EXPECT_EQ(p.invocation.state, InvocationState::kValidated);
  return p.invocation.invocation_id;
}

}  // namespace

// ---------------------------------------------------------------- sessions

TEST(OpenSession, FreshAndDistinct) {
  GateEnv env;
  auto a = env.gate->open_session();
  auto b = env.gate->open_session();
  EXPECT_NE(a, b);
  EXPECT_TRUE(is_uuid(a));
  auto ctx = env.gate->session(a);
  EXPECT_TRUE(ctx.messages.empty());
  EXPECT_TRUE(ctx.action_log.empty());
  EXPECT_FALSE(ctx.pending_invocation);
  EXPECT_EQ(env.gate->session_count(), 2u);
  EXPECT_THROW(env.gate->session("nope"), NotFound);
}

// ---------------------------------------------------------------- step

TEST(Step, SuperalloyRequestSearchesRegistry) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto planner = ScriptedPlanner::from_document(Json::array(
      {{{"match", "I want to design a new superalloy with low chromium"},
        {"decision", to_document(act("search_workflows", {{"query", "alloy design"}}))}}}));
  auto out = env.gate->step(sid, "I want to design a new superalloy with low chromium", planner);
  ASSERT_EQ(out.actions.size(), 1u);
  const auto& results = out.actions[0].result["results"];
  ASSERT_FALSE(results.empty());
  EXPECT_EQ(results[0]["workflow_id"], "alloy_inverse_design");
  // Same ranking as the registry call itself.
  auto direct = env.registry.search_workflows("alloy design");
  ASSERT_EQ(results.size(), direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(results[i]["workflow_id"], direct[i].workflow_id);

  auto ctx = env.gate->session(sid);
  ASSERT_EQ(ctx.action_log.size(), 1u);
  EXPECT_EQ(ctx.action_log[0].action, "search_workflows");
  EXPECT_EQ(ctx.action_log[0].outcome, "executed");
  EXPECT_EQ(ctx.action_log[0].result_digest.size(), 64u);
  EXPECT_EQ(ctx.messages.front().role, "user");
}

TEST(Step, ExecuteWithoutParametersPromptsForRequiredFields) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner planner({act("execute_workflow", {{"workflow_id", "alloy_inverse_design"}})});
  auto out = env.gate->step(sid, "run it", planner);
  ASSERT_TRUE(out.proposal);
  EXPECT_EQ(out.proposal->invocation.state, InvocationState::kDraft);
  EXPECT_EQ(prompt_names(*out.proposal), (std::vector<std::string>{"dataset_id", "target_properties", "constraints"}));
  for (const auto& p : out.proposal->prompts) EXPECT_EQ(p.reason, PromptReason::kMissing);
  EXPECT_TRUE(env.executor->submissions().empty());
  EXPECT_EQ(env.gate->session(sid).pending()->invocation_id, out.proposal->invocation.invocation_id);
}

TEST(Step, UnknownActionIsRefusedAndLoggedOnce) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner planner({act("delete_registry", Json::object())});
  auto out = env.gate->step(sid, "wipe everything", planner);
  ASSERT_TRUE(out.refusal);
  EXPECT_EQ(out.refusal->code, "ActionArgumentError");
  EXPECT_TRUE(out.actions.empty());
  auto ctx = env.gate->session(sid);
  ASSERT_EQ(ctx.action_log.size(), 1u);
  EXPECT_EQ(ctx.action_log[0].outcome, "refused");
  EXPECT_EQ(env.registry.list_workflows().size(), 2u);
}

TEST(Step, IllTypedArgumentsNeverExecute) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner planner({act("search_workflows", {{"query", 5}}), act("list_datasets", Json::object())});
  auto out = env.gate->step(sid, "find", planner);
  ASSERT_TRUE(out.refusal);
  ASSERT_FALSE(out.refusal->diagnostics.empty());
  EXPECT_EQ(out.refusal->diagnostics[0].check, checks::kTypeMismatch);
  // The refusal ends the turn.
  EXPECT_TRUE(out.actions.empty());
}

TEST(Step, ActionArgumentSchemasAreClosed) {
  EXPECT_TRUE(check_action_arguments("list_datasets", Json::object()).empty());
  EXPECT_TRUE(has_errors(check_action_arguments("list_datasets", {{"limit", 3}})));
  EXPECT_TRUE(has_errors(check_action_arguments("get_parameters", Json::object())));
  EXPECT_TRUE(has_errors(check_action_arguments("get_parameters", {{"workflow_id", "x"}, {"version", "two"}})));
  EXPECT_TRUE(has_errors(check_action_arguments("execute_workflow", {{"workflow_id", "x"}, {"parameters", 1}})));
  EXPECT_TRUE(has_errors(check_action_arguments("search_workflows", Json::array())));
  EXPECT_EQ(platform_actions().size(), 4u);
}

TEST(Step, ReadActionsContinueTheTurn) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner planner({act("get_parameters", {{"workflow_id", "basic_data_analysis"}}),
                        act("list_datasets", Json::object()), PlannerDecision{"done", std::nullopt}});
  auto out = env.gate->step(sid, "what can I run", planner);
  ASSERT_EQ(out.actions.size(), 2u);
  EXPECT_EQ(out.actions[0].result["parameters"],
            parameter_schema_document(env.registry.get_parameters("basic_data_analysis")));
  EXPECT_EQ(out.actions[1].result["datasets"].size(), 2u);
  EXPECT_EQ(out.assistant_messages, std::vector<std::string>{"done"});
}

TEST(Step, UnknownWorkflowIsRefusedWithNotFound) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner planner({act("execute_workflow", {{"workflow_id", "ghost"}})});
  auto out = env.gate->step(sid, "run ghost", planner);
  ASSERT_TRUE(out.refusal);
  EXPECT_EQ(out.refusal->code, "NotFound");
  EXPECT_FALSE(env.gate->session(sid).pending_invocation);
}

TEST(Step, PlannerFailureLeavesSessionUsable) {
  GateEnv env;
  auto sid = env.gate->open_session();
  DownPlanner down;
  EXPECT_THROW(env.gate->step(sid, "hello", down), PlannerUnavailable);
  FixedPlanner planner({act("list_datasets", Json::object())});
  auto out = env.gate->step(sid, "hello again", planner);
  EXPECT_EQ(out.actions.size(), 1u);
}

TEST(Step, ExecuteWorkflowRoutesToClarifyThenAmend) {
  GateEnv env;
  auto sid = env.gate->open_session();
  FixedPlanner first({act("execute_workflow", {{"workflow_id", "basic_data_analysis"}})});
  auto draft = env.gate->step(sid, "analyse", first).proposal;
  ASSERT_TRUE(draft);
  FixedPlanner second(
      {act("execute_workflow", {{"workflow_id", "basic_data_analysis"}, {"parameters", {{"dataset_file", "basic_10row.csv"}}}})});
  auto clarified = env.gate->step(sid, "use basic_10row.csv", second).proposal;
  ASSERT_TRUE(clarified);
  EXPECT_EQ(clarified->invocation.invocation_id, draft->invocation.invocation_id);
  EXPECT_EQ(clarified->invocation.state, InvocationState::kValidated);
  EXPECT_EQ(env.gate->session(sid).action_log.back().outcome, "clarify");

  env.gate->approve(sid, clarified->invocation.invocation_id);
  env.executor->wait(env.gate->dispatch(sid, clarified->invocation.invocation_id));
  FixedPlanner third(
      {act("execute_workflow", {{"workflow_id", "basic_data_analysis"}, {"parameters", {{"missing_strategy", "fill_mean"}}}})});
  auto amended = env.gate->step(sid, "fill instead", third).proposal;
  ASSERT_TRUE(amended);
  EXPECT_NE(amended->invocation.invocation_id, clarified->invocation.invocation_id);
  EXPECT_EQ(amended->invocation.parent_invocation, clarified->invocation.invocation_id);
  EXPECT_EQ(env.gate->session(sid).action_log.back().outcome, "amend_invocation");
}

// ---------------------------------------------------------------- propose

TEST(Propose, FullAlloyBlockValidates) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, alloy_block());
  EXPECT_EQ(p.invocation.state, InvocationState::kValidated);
  EXPECT_TRUE(p.prompts.empty());
  EXPECT_TRUE(p.workflow_diagnostics.empty());
  EXPECT_EQ(p.invocation.version, (SemVer{2, 1, 0}));
  EXPECT_TRUE(is_uuid(p.invocation.invocation_id));
  EXPECT_EQ(p.invocation.parameters, alloy_block());
}

TEST(Propose, OmittedTargetPropertiesGivesOneMissingPrompt) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto params = alloy_block();
  params.erase("target_properties");
  auto p = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, params);
  ASSERT_EQ(p.prompts.size(), 1u);
  EXPECT_EQ(p.prompts[0].parameter, "target_properties");
  EXPECT_EQ(p.prompts[0].reason, PromptReason::kMissing);
  EXPECT_EQ(p.invocation.state, InvocationState::kDraft);
}

TEST(Propose, WordForIntegerIsTypeMismatch) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto params = alloy_block();
  params["n_candidates"] = "fifty";
  auto p = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, params);
  ASSERT_EQ(p.prompts.size(), 1u);
  EXPECT_EQ(p.prompts[0].reason, PromptReason::kTypeMismatch);
  // Oracle: the parameter's own schema rejects the value with a type diagnostic.
  const auto schema = env.registry.get_parameters("alloy_inverse_design");
  const auto* param = find_parameter(schema, "n_candidates");
  auto diags = validate_value("fifty", *param, "n_candidates");
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags[0].check, checks::kTypeMismatch);
  EXPECT_EQ(p.prompts[0].expected, describe_expectation(*param));
  EXPECT_NE(p.prompts[0].expected.find("int"), std::string::npos);
}

TEST(Propose, UnknownParameterAndWorkflow) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto params = alloy_block();
  params["learning_rate"] = 0.1;
  EXPECT_THROW(env.gate->propose(sid, "alloy_inverse_design", std::nullopt, params), UnknownParameter);
  EXPECT_THROW(env.gate->propose(sid, "ghost", std::nullopt, Json::object()), NotFound);
  EXPECT_THROW(env.gate->propose(sid, "alloy_inverse_design", SemVer{9, 0, 0}, Json::object()), NotFound);
  EXPECT_TRUE(env.gate->session(sid).invocations.empty());
}

TEST(Propose, RetiredWorkflowIsRefused) {
  GateEnv env;
  auto sid = env.gate->open_session();
  env.registry.retire_workflow("basic_data_analysis", {1, 0, 0});
  EXPECT_THROW(env.gate->propose(sid, "basic_data_analysis", std::nullopt, Json::object()), Retired);
}

// ---------------------------------------------------------------- clarify

TEST(Clarify, PromptsShrinkUntilValidated) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, Json::object());
  const auto id = p.invocation.invocation_id;
  ASSERT_EQ(p.prompts.size(), 3u);
  p = env.gate->clarify(sid, id, "target_properties", Json{"yield_strength", "creep_life"});
  EXPECT_EQ(prompt_names(p), (std::vector<std::string>{"dataset_id", "constraints"}));
  p = env.gate->clarify(sid, id, "validation_strategy", "7-fold");
  ASSERT_EQ(p.prompts.size(), 3u);
  EXPECT_EQ(p.prompts[2].parameter, "validation_strategy");
  EXPECT_EQ(p.prompts[2].reason, PromptReason::kConstraintViolation);
  for (const char* allowed : {"5-fold", "10-fold", "leave-one-out"}) {
    EXPECT_NE(p.prompts[2].message.find(allowed), std::string::npos) << p.prompts[2].message;
  }
  p = env.gate->clarify(sid, id, "validation_strategy", "10-fold");
  p = env.gate->clarify(sid, id, "dataset_id", "123e4567-e89b-12d3-a456-426614174000");
  EXPECT_EQ(p.invocation.state, InvocationState::kDraft);
  p = env.gate->clarify(sid, id, "constraints", Json{{"Cr", {{"max", 12.0}}}});
  EXPECT_EQ(p.invocation.state, InvocationState::kValidated);
  EXPECT_TRUE(p.prompts.empty());
  EXPECT_EQ(p.invocation.invocation_id, id);
}

TEST(Clarify, ChangeAfterValidationResetsToDraft) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto id = validated_alloy(*env.gate, sid);
  env.gate->approve(sid, id);
  auto p = env.gate->clarify(sid, id, "n_candidates", 10);
  EXPECT_EQ(p.invocation.state, InvocationState::kValidated);
  using S = InvocationState;
  EXPECT_EQ(p.invocation.history, (std::vector<S>{S::kDraft, S::kValidated, S::kApproved, S::kDraft, S::kValidated}));
  // Same value again: no parameter change, no reset.
  p = env.gate->clarify(sid, id, "n_candidates", 10);
  EXPECT_EQ(p.invocation.history.size(), 5u);
}

TEST(Clarify, UnknownParameterAndDispatchedInvocation) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto id = validated_alloy(*env.gate, sid);
  EXPECT_THROW(env.gate->clarify(sid, id, "temperature", 5), UnknownParameter);
  EXPECT_THROW(env.gate->clarify(sid, "missing", "n_candidates", 5), NotFound);
  env.gate->approve(sid, id);
  env.executor->wait(env.gate->dispatch(sid, id));
  EXPECT_THROW(env.gate->clarify(sid, id, "n_candidates", 5), InvalidState);
}

// ---------------------------------------------------------------- approve / dispatch

TEST(Approve, StateMachineAndIdempotence) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto draft = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, Json::object()).invocation.invocation_id;
  EXPECT_THROW(env.gate->approve(sid, draft), NotValidated);
  auto id = validated_alloy(*env.gate, sid);
  EXPECT_EQ(env.gate->approve(sid, id).state, InvocationState::kApproved);
  const auto entries = env.gate->session(sid).action_log.size();
  EXPECT_EQ(env.gate->approve(sid, id).state, InvocationState::kApproved);
  auto ctx = env.gate->session(sid);
  EXPECT_EQ(ctx.action_log.size(), entries);
  int approvals = 0;
  for (const auto& e : ctx.action_log) {
    if (e.action != "approve") continue;
    ++approvals;
    EXPECT_EQ(e.arguments["approver"], "user");
    EXPECT_FALSE(e.arguments["timestamp"].get<std::string>().empty());
  }
  EXPECT_EQ(approvals, 1);
}

TEST(Dispatch, ApprovedBasicWorkflowSucceeds) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "basic_data_analysis", std::nullopt, {{"dataset_file", "basic_10row.csv"}});
  ASSERT_EQ(p.invocation.state, InvocationState::kValidated);
  env.gate->approve(sid, p.invocation.invocation_id);
  auto run_id = env.gate->dispatch(sid, p.invocation.invocation_id);
  auto record = env.executor->wait(run_id);
  EXPECT_EQ(record.status, RunStatus::kSucceeded);
  EXPECT_EQ(record.invocation.invocation_id, p.invocation.invocation_id);
  EXPECT_EQ(record.invocation.state, InvocationState::kDispatched);
  auto ctx = env.gate->session(sid);
  EXPECT_EQ(ctx.last_run_ids, std::vector<std::string>{run_id});
  EXPECT_EQ(ctx.invocations.at(p.invocation.invocation_id).state, InvocationState::kDispatched);
  // The snapshot is the registry's canonical document.
  EXPECT_EQ(record.workflow_hash, env.registry.list_workflows()[1].content_hash);
  EXPECT_THROW(env.gate->dispatch(sid, p.invocation.invocation_id), InvalidState);
}

TEST(Dispatch, UnapprovedInvocationsNeverReachTheExecutor) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto draft = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, Json::object()).invocation.invocation_id;
  EXPECT_THROW(env.gate->dispatch(sid, draft), NotValidated);
  auto validated = validated_alloy(*env.gate, sid);
  EXPECT_THROW(env.gate->dispatch(sid, validated), NotApproved);
  EXPECT_TRUE(env.executor->submissions().empty());
  EXPECT_EQ(env.store.count(), 0u);
}

TEST(Dispatch, RetiredToolBetweenApproveAndDispatchIsRegression) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "basic_data_analysis", std::nullopt, {{"dataset_file", "basic_10row.csv"}});
  env.gate->approve(sid, p.invocation.invocation_id);
  env.registry.retire_tool("data_cleaner", {1, 0, 0});
  try {
    env.gate->dispatch(sid, p.invocation.invocation_id);
    FAIL() << "dispatch went through";
  } catch (const GateRegression& e) {
    ASSERT_FALSE(e.diagnostics().empty());
    bool names_tool = false;
    for (const auto& d : e.diagnostics()) names_tool |= d.message.find("data_cleaner") != std::string::npos;
    EXPECT_TRUE(names_tool);
  }
  EXPECT_TRUE(env.executor->submissions().empty());
  EXPECT_EQ(env.store.count(), 0u);
  EXPECT_EQ(env.gate->invocation(sid, p.invocation.invocation_id).state, InvocationState::kApproved);
}

TEST(Dispatch, MissingAdapterIsExecutorUnavailable) {
  AdapterRegistry partial;
  for (auto id : builtin_adapters().tool_ids()) {
    if (id != "data_analyzer") partial.add(builtin_adapters().find(id));
  }
  GateEnv env(7, {}, partial);
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "basic_data_analysis", std::nullopt, {{"dataset_file", "basic_10row.csv"}});
  env.gate->approve(sid, p.invocation.invocation_id);
  EXPECT_THROW(env.gate->dispatch(sid, p.invocation.invocation_id), ExecutorUnavailable);
  EXPECT_EQ(env.gate->invocation(sid, p.invocation.invocation_id).state, InvocationState::kApproved);
  EXPECT_EQ(env.store.count(), 0u);
}

TEST(Dispatch, AutoApproveIsOptIn) {
  GateEnv env(7, GateOptions{true, "ops", 8});
  auto sid = env.gate->open_session();
  auto p = env.gate->propose(sid, "basic_data_analysis", std::nullopt, {{"dataset_file", "basic_10row.csv"}});
  auto run = env.gate->dispatch(sid, p.invocation.invocation_id);
  env.executor->wait(run);
  using S = InvocationState;
  EXPECT_EQ(env.gate->invocation(sid, p.invocation.invocation_id).history,
            (std::vector<S>{S::kDraft, S::kValidated, S::kApproved, S::kDispatched}));
  EXPECT_FALSE(GateOptions{}.auto_approve);
}

// ---------------------------------------------------------------- amend

TEST(Amend, LeaveOneOutDiffersInExactlyThatField) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto prior = validated_alloy(*env.gate, sid);
  auto p = env.gate->amend(sid, prior, {{"validation_strategy", "leave-one-out"}});
  EXPECT_EQ(p.invocation.state, InvocationState::kValidated);
  EXPECT_EQ(p.invocation.parent_invocation, prior);
  EXPECT_NE(p.invocation.invocation_id, prior);
  auto expected = alloy_block();
  expected["validation_strategy"] = "leave-one-out";
  EXPECT_EQ(p.invocation.parameters, expected);
}

TEST(Amend, EmptyOverridesCopyParameters) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto prior = validated_alloy(*env.gate, sid);
  auto p = env.gate->amend(sid, prior, Json::object());
  EXPECT_EQ(p.invocation.parameters, alloy_block());
  EXPECT_NE(p.invocation.invocation_id, prior);
  EXPECT_EQ(p.invocation.parent_invocation, prior);
}

TEST(Amend, DisallowedStrategyStaysDraft) {
  GateEnv env;
  auto sid = env.gate->open_session();
  auto prior = validated_alloy(*env.gate, sid);
  auto p = env.gate->amend(sid, prior, {{"validation_strategy", "7-fold"}});
  EXPECT_EQ(p.invocation.state, InvocationState::kDraft);
  ASSERT_EQ(p.prompts.size(), 1u);
  EXPECT_EQ(p.prompts[0].reason, PromptReason::kConstraintViolation);
  EXPECT_THROW(env.gate->amend(sid, prior, {{"seed", 1}}), UnknownParameter);
  EXPECT_THROW(env.gate->amend(sid, "missing", Json::object()), NotFound);
}

// ---------------------------------------------------------------- properties

TEST(GateProperties, AmendmentEquivalence) {
  GateEnv env;
  Gen gen(11);
  const auto& pool = ValuePool::alloy();
  for (int i = 0; i < 300; ++i) {
    auto sid = env.gate->open_session();
    Json base = Json::object();
    Json overrides = Json::object();
    for (const auto& [name, good] : pool.good) {
      if (gen.coin(0.7)) base[name] = gen.coin(0.7) ? gen.pick(good) : gen.pick(pool.bad.at(name));
      if (gen.coin(0.3)) overrides[name] = gen.coin(0.6) ? gen.pick(good) : gen.pick(pool.bad.at(name));
    }
    auto prior = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, base).invocation.invocation_id;
    auto amended = env.gate->amend(sid, prior, overrides);
    Json merged = base;
    for (const auto& [k, v] : overrides.items()) merged[k] = v;
    auto direct = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, merged);
    EXPECT_EQ(amended.prompts, direct.prompts) << merged.dump();
    EXPECT_EQ(amended.invocation.state, direct.invocation.state);
    EXPECT_EQ(amended.invocation.parameters, direct.invocation.parameters);
  }
}

TEST(GateProperties, ClarificationCompleteness) {
  GateEnv env;
  Gen gen(12);
  const auto schema = env.registry.get_parameters("alloy_inverse_design");
  const auto& pool = ValuePool::alloy();
  for (int i = 0; i < 300; ++i) {
    Json params = Json::object();
    std::vector<std::string> defective;
    for (const auto& p : schema) {
      const int choice = gen.uniform(0, 2);
      if (choice == 0) {
        if (p.required && !p.default_value) defective.push_back(p.name);
      } else if (choice == 1) {
        params[p.name] = gen.pick(pool.good.at(p.name));
      } else {
        params[p.name] = gen.pick(pool.bad.at(p.name));
        defective.push_back(p.name);
      }
    }
    auto sid = env.gate->open_session();
    auto proposal = env.gate->propose(sid, "alloy_inverse_design", std::nullopt, params);
    EXPECT_EQ(prompt_names(proposal), defective) << params.dump();
    EXPECT_EQ(proposal.invocation.state == InvocationState::kValidated, defective.empty());
  }
}

TEST(GateProperties, NoBypassFuzz) {
  auto report = testsupport::run_no_bypass_fuzz(2024, 1500);
  for (const auto& v : report.violations) ADD_FAILURE() << v;
  EXPECT_EQ(report.sequences, 1500);
  EXPECT_GT(report.dispatch_attempts, 0);
  EXPECT_GT(report.dispatches, 0) << "fuzz never reached an approved dispatch";
}

TEST(GateProperties, ScriptedPlannerIsAFunctionOfContext) {
  auto planner = ScriptedPlanner::from_document(
      {{"planner",
        {{{"pattern", "find (.*)"},
          {"decisions",
           {to_document(act("search_workflows", {{"query", "x"}})), to_document(act("list_datasets", Json::object()))}}}}}});
  SessionContext ctx;
  ctx.messages.push_back({"user", "find alloys"});
  auto a = planner.decide(ctx);
  auto b = planner.decide(ctx);
  EXPECT_EQ(to_document(a), to_document(b));
  ctx.turn_consultations = 1;
  EXPECT_EQ(planner.decide(ctx).proposed_action->action, "list_datasets");
  ctx.turn_consultations = 2;
  EXPECT_FALSE(planner.decide(ctx).proposed_action);
  ctx.messages.push_back({"user", "something else"});
  ctx.turn_consultations = 0;
  EXPECT_FALSE(planner.decide(ctx).proposed_action);
}

TEST(PlannerDocuments, DecisionShapeIsChecked) {
  EXPECT_THROW(decision_from_document(Json::array()), InvalidDocument);
  EXPECT_THROW(decision_from_document({{"assistant_message", 3}}), InvalidDocument);
  EXPECT_THROW(decision_from_document({{"proposed_action", {{"arguments", Json::object()}}}}), InvalidDocument);
  EXPECT_THROW(decision_from_document({{"tool", "x"}}), InvalidDocument);
  auto d = decision_from_document({{"assistant_message", "hi"}, {"proposed_action", nullptr}});
  EXPECT_EQ(d.assistant_message, "hi");
  EXPECT_FALSE(d.proposed_action);
  EXPECT_THROW(ScriptedPlanner::from_document({{{"decisions", Json::array()}}}), InvalidDocument);
  EXPECT_THROW(ScriptedPlanner::from_document({{{"pattern", "(("}}}), InvalidDocument);
}

// ---------------------------------------------------------------- replay

TEST(Replay, AlloySessionCompletes) {
  auto script = testsupport::load_json("sessions/table7.session");
  GateEnv env(script_seed(script));
  auto result = replay_session(script, *env.gate);
  ASSERT_TRUE(result.passed) << *result.divergence << "\n" << render_replay_table(result);
  EXPECT_EQ(result.rows.size(), 12u);
  ASSERT_EQ(result.run_ids.size(), 2u);
  EXPECT_EQ(env.store.count(), 2u);
  auto cmp = env.executor->compare_runs(result.run_ids[0], result.run_ids[1]);
  EXPECT_EQ(cmp.parameter_diff, (Json{{"validation_strategy", {"5-fold", "leave-one-out"}}}));
  // Turn 5 probed dispatch on the draft and was blocked.
  EXPECT_NE(result.rows[4].gate.find("NotValidated"), std::string::npos) << result.rows[4].gate;
  auto table = render_replay_table(result);
  EXPECT_NE(table.find("search_workflows"), std::string::npos);
  EXPECT_NE(table.find("replay completed: 12 turns, 2 runs"), std::string::npos) << table;
}

TEST(Replay, EarlyDispatchDivergesAsBlocked) {
  auto script = testsupport::load_json("sessions/early_dispatch.session");
  GateEnv env(script_seed(script));
  auto result = replay_session(script, *env.gate);
  EXPECT_FALSE(result.passed);
  ASSERT_TRUE(result.divergence);
  EXPECT_NE(result.divergence->find("turn 6"), std::string::npos) << *result.divergence;
  EXPECT_NE(result.divergence->find("gate blocked"), std::string::npos) << *result.divergence;
  EXPECT_TRUE(result.run_ids.empty());
  EXPECT_EQ(env.store.count(), 0u);
}

TEST(Replay, EmptyScript) {
  GateEnv env;
  auto result = replay_session(testsupport::load_json("sessions/empty.session"), *env.gate);
  EXPECT_TRUE(result.passed);
  EXPECT_TRUE(result.rows.empty());
  EXPECT_THROW(replay_session({{"turns", {{{"say", 1}}}}}, *env.gate), InvalidDocument);
  EXPECT_THROW(replay_session({{"steps", Json::array()}}, *env.gate), InvalidDocument);
}

TEST(Replay, ScriptedDeterminism) {
  auto script = testsupport::load_json("sessions/table7.session");
  std::vector<std::string> logs;
  std::vector<std::string> outputs;
  for (int i = 0; i < 2; ++i) {
    GateEnv env(script_seed(script));
    auto result = replay_session(script, *env.gate);
    ASSERT_TRUE(result.passed);
    logs.push_back(render_document(action_log_document(env.gate->session(result.session_id))));
    std::string steps;
    for (const auto& id : result.run_ids) {
      for (const auto& s : env.executor->get_run(id).steps) steps += render_document(s.outputs);
    }
    outputs.push_back(steps);
  }
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(outputs[0], outputs[1]);
}
