#include "schemagate/executor.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "schemagate/digest.hpp"
#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/validation.hpp"

namespace schemagate {

std::set<std::string> downstream_steps(const WorkflowDefinition& wf, const std::string& step_id) {
  std::map<std::string, std::set<std::string>> next;
  for (const auto& s : wf.steps) {
    for (const auto& d : s.dependencies) next[d].insert(s.step_id);
  }
  for (const auto& e : wf.edges) next[e.source_node_id].insert(e.target_node_id);
  for (const auto& m : wf.parameter_mappings) next[m.from_step].insert(m.to_step);
  std::set<std::string> seen;
  std::deque<std::string> queue{step_id};
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (const auto& n : next[cur]) {
      if (seen.insert(n).second) queue.push_back(n);
    }
  }
  seen.erase(step_id);
  return seen;
}

Json resolve_parameters(const WorkflowDefinition& wf, const Json& supplied) {
  Json out = Json::object();
  for (const auto& p : wf.parameters) {
    if (supplied.contains(p.name) && !supplied[p.name].is_null()) {
      out[p.name] = supplied[p.name];
    } else if (p.default_value) {
      out[p.name] = *p.default_value;
    }
  }
  return out;
}

Executor::Executor(RunStore& store, const ToolResolver& tools, AdapterRegistry adapters,
                   const DatasetStore* datasets, std::shared_ptr<Clock> clock, std::shared_ptr<IdSource> ids,
                   ExecutorOptions options)
    : store_(store),
      tools_(tools),
      adapters_(std::move(adapters)),
      datasets_(datasets),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      ids_(ids ? std::move(ids) : std::make_shared<RandomIdSource>()),
      options_(options) {}

Executor::~Executor() {
  std::vector<std::pair<std::shared_ptr<LiveRun>, std::thread>> threads;
  {
    std::lock_guard lock(mu_);
    threads.swap(threads_);
  }
  for (auto& [live, t] : threads) {
    if (t.joinable()) t.join();
  }
}

std::string Executor::execute(const InvocationObject& invocation, const WorkflowDefinition& snapshot) {
  if (invocation.state != InvocationState::kDispatched) {
    throw NotApproved("executor accepts dispatched invocations only; " + invocation.invocation_id + " is " +
                      std::string(state_name(invocation.state)));
  }
  if (invocation.workflow_id != snapshot.workflow_id || invocation.version != snapshot.version) {
    throw InvalidState("invocation does not match the workflow snapshot");
  }
  auto live = std::make_shared<LiveRun>();
  live->workflow = snapshot;
  for (const auto& s : snapshot.steps) {
    auto lookup = tools_.lookup_tool(s.tool_id);
    if (!lookup.tool) throw AdapterMissing("tool '" + s.tool_id + "' cannot be resolved");
    auto adapter = adapters_.find(s.tool_id);
    if (!adapter) throw AdapterMissing("no adapter registered for tool '" + s.tool_id + "'");
    live->tools[s.tool_id] = lookup.tool;
    live->record.environment.tool_adapter_versions[s.tool_id] = adapter->version().str();
  }
  step_order(snapshot);  // throws on cycles before anything is recorded

  auto& r = live->record;
  const auto canonical = canonical_text(snapshot);
  r.run_id = ids_->next_uuid();
  r.invocation = invocation;
  r.workflow_snapshot = Json::parse(canonical);
  r.workflow_hash = sha256_hex(canonical);
  r.resolved_parameters = resolve_parameters(snapshot, invocation.parameters);
  r.started_at = clock_->now();
  auto env = current_environment();
  env.tool_adapter_versions = std::move(r.environment.tool_adapter_versions);
  env.seed = options_.seed;
  r.environment = std::move(env);
  for (const auto& s : snapshot.steps) {
    StepResult sr;
    sr.step_id = s.step_id;
    sr.tool_id = s.tool_id;
    r.steps.push_back(std::move(sr));
  }

  std::lock_guard lock(mu_);
  emit(*live, "", "run_started", "running");
  persist(*live);
  runs_[r.run_id] = live;
  submissions_.push_back({r.run_id, invocation.invocation_id, invocation.state});
  // A terminal run's thread no longer needs mu_, so joining here cannot deadlock.
  auto done = std::remove_if(threads_.begin(), threads_.end(), [](auto& entry) {
    if (!is_terminal(entry.first->record.status)) return false;
    entry.second.join();
    return true;
  });
  threads_.erase(done, threads_.end());
  threads_.emplace_back(live, std::thread([this, live] { run(live); }));
  return r.run_id;
}

void Executor::emit(LiveRun& live, const std::string& step_id, const std::string& event, const std::string& status) {
  live.events.push_back({live.record.run_id, step_id, event, status, clock_->now()});
  cv_.notify_all();
}

void Executor::persist(const LiveRun& live) { store_.save(live.record, live.events); }

void Executor::run(std::shared_ptr<LiveRun> live) {
  const auto& wf = live->workflow;
  std::vector<std::string> order = step_order(wf);
  std::map<std::string, ValueMap> produced;
  std::set<std::string> skipped;
  ModelCache models;

  auto index_of = [&](const std::string& id) -> StepResult& {
    for (auto& s : live->record.steps) {
      if (s.step_id == id) return s;
    }
    throw std::logic_error("unknown step " + id);
  };

  for (const auto& step_id : order) {
    {
      std::lock_guard lock(mu_);
      if (skipped.count(step_id)) continue;
      if (live->abort) break;
      auto& sr = index_of(step_id);
      sr.status = StepStatus::kRunning;
      sr.started_at = clock_->now();
      emit(*live, step_id, "step_started", "running");
      persist(*live);
    }
    const auto& step = *wf.step(step_id);
    const auto& tool = *live->tools.at(step.tool_id);
    AdapterResult result;
    Json outputs = Json::object();
    std::optional<std::string> error;
    try {
      Json params = Json::object();
      ValueMap inputs;
      const auto& resolved = live->record.resolved_parameters;
      for (const auto& [key, literal] : step.parameters.items()) {
        Json value = literal;
        if (auto ref = workflow_reference(literal)) {
          if (!resolved.contains(*ref)) continue;
          value = resolved[*ref];
        }
        if (tool.io.input(key)) {
          inputs[key] = value;
        } else {
          params[key] = value;
        }
      }
      for (const auto& p : tool.parameters) {
        if (params.contains(p.name)) continue;
        if (resolved.contains(p.name)) {
          params[p.name] = resolved[p.name];
        } else if (p.default_value) {
          params[p.name] = *p.default_value;
        }
      }
      for (const auto& m : wf.parameter_mappings) {
        if (m.to_step != step_id) continue;
        const auto& upstream = produced[m.from_step];
        auto it = upstream.find(m.from_parameter);
        if (it == upstream.end()) {
          throw std::runtime_error("upstream step '" + m.from_step + "' did not produce '" + m.from_parameter + "'");
        }
        inputs[m.to_parameter] = it->second;
      }
      AdapterContext ctx{datasets_, &models, options_.seed, step_id};
      result = adapters_.find(step.tool_id)->run(inputs, params, ctx);
      for (const auto& [name, value] : result.outputs) {
        const auto* slot = tool.io.output(name);
        if (!slot) throw std::runtime_error("adapter returned undeclared output '" + name + "'");
        if (!value_matches(value, slot->type)) {
          throw std::runtime_error("output '" + name + "' does not match declared type " + slot->type.render());
        }
        if (const auto* frame = std::get_if<FramePtr>(&value)) {
          outputs[name] = store_.put_artifact(**frame);
        } else {
          outputs[name] = std::get<Json>(value);
        }
      }
    } catch (const std::exception& e) {
      error = e.what();
    } catch (...) {
      error = "adapter raised a non-standard exception";
    }

    std::lock_guard lock(mu_);
    auto& sr = index_of(step_id);
    sr.finished_at = clock_->now();
    if (error) {
      sr.status = StepStatus::kFailed;
      if (!live->record.failure) live->record.failure = RunFailure{step_id, *error};
      emit(*live, step_id, "step_finished", "failed");
      for (const auto& down : downstream_steps(wf, step_id)) {
        if (!skipped.insert(down).second) continue;
        auto& d = index_of(down);
        d.status = StepStatus::kSkipped;
        emit(*live, down, "step_finished", "skipped");
      }
    } else {
      sr.status = StepStatus::kSucceeded;
      sr.outputs = std::move(outputs);
      if (!result.metrics.empty()) sr.metrics = result.metrics;
      produced[step_id] = std::move(result.outputs);
      emit(*live, step_id, "step_finished", "succeeded");
    }
    persist(*live);
  }

  std::lock_guard lock(mu_);
  auto& r = live->record;
  for (auto& s : r.steps) {
    if (s.status == StepStatus::kPending) {
      s.status = StepStatus::kSkipped;
      emit(*live, s.step_id, "step_finished", "skipped");
    }
  }
  r.status = r.failure ? RunStatus::kFailed : live->abort ? RunStatus::kAborted : RunStatus::kSucceeded;
  r.finished_at = clock_->now();
  emit(*live, "", "run_finished", std::string(run_status_name(r.status)));
  persist(*live);
}

std::shared_ptr<Executor::LiveRun> Executor::live_run(const std::string& run_id) const {
  auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : it->second;
}

RunRecord Executor::get_run(const std::string& run_id) const {
  {
    std::lock_guard lock(mu_);
    if (auto live = live_run(run_id)) return live->record;
  }
  if (auto stored = store_.load(run_id)) return *stored;
  throw NotFound("run '" + run_id + "' does not exist");
}

std::vector<RunEvent> Executor::events(const std::string& run_id, std::size_t from) const {
  std::vector<RunEvent> all;
  {
    std::lock_guard lock(mu_);
    if (auto live = live_run(run_id)) {
      all = live->events;
    } else if (store_.load(run_id)) {
      all = store_.load_events(run_id);
    } else {
      throw NotFound("run '" + run_id + "' does not exist");
    }
  }
  if (from >= all.size()) return {};
  return {all.begin() + static_cast<std::ptrdiff_t>(from), all.end()};
}

std::vector<RunEvent> Executor::wait_events(const std::string& run_id, std::size_t from,
                                            std::chrono::milliseconds timeout) const {
  {
    std::unique_lock lock(mu_);
    if (auto live = live_run(run_id)) {
      cv_.wait_for(lock, timeout,
                   [&] { return live->events.size() > from || is_terminal(live->record.status); });
    }
  }
  return events(run_id, from);
}

RunRecord Executor::wait(const std::string& run_id) const {
  std::unique_lock lock(mu_);
  auto live = live_run(run_id);
  if (!live) {
    lock.unlock();
    return get_run(run_id);
  }
  cv_.wait(lock, [&] { return is_terminal(live->record.status); });
  return live->record;
}

void Executor::abort(const std::string& run_id) {
  std::lock_guard lock(mu_);
  auto live = live_run(run_id);
  if (!live) {
    if (store_.load(run_id)) return;
    throw NotFound("run '" + run_id + "' does not exist");
  }
  live->abort = true;
}

RunComparison Executor::compare_runs(const std::string& a, const std::string& b) const {
  return compare_records(get_run(a), get_run(b));
}

std::vector<Submission> Executor::submissions() const {
  std::lock_guard lock(mu_);
  return submissions_;
}

}  // namespace schemagate
