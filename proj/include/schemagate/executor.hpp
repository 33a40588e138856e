#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "schemagate/adapters.hpp"
#include "schemagate/clock.hpp"
#include "schemagate/definitions.hpp"
#include "schemagate/provenance.hpp"
#include "schemagate/resolver.hpp"

namespace schemagate {

struct ExecutorOptions {
  std::uint64_t seed = 0;
};

/// One accepted call to execute(), kept for audits.
struct Submission {
  std::string run_id;
  std::string invocation_id;
  InvocationState state = InvocationState::kDraft;
};

/// Runs workflow snapshots in the background, one thread per run, steps in
/// topological order. Every status transition is persisted to the RunStore.
class Executor {
 public:
  Executor(RunStore& store, const ToolResolver& tools, AdapterRegistry adapters,
           const DatasetStore* datasets = nullptr, std::shared_ptr<Clock> clock = nullptr,
           std::shared_ptr<IdSource> ids = nullptr, ExecutorOptions options = {});
  ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  /// Requires a dispatched invocation. Throws AdapterMissing before creating
  /// a run when some step has no adapter or unresolvable tool.
  std::string execute(const InvocationObject& invocation, const WorkflowDefinition& snapshot);

  /// Current record; falls back to the store for runs of other processes.
  RunRecord get_run(const std::string& run_id) const;
  std::vector<RunEvent> events(const std::string& run_id, std::size_t from = 0) const;
  /// Events after the first `from`, waiting up to `timeout` for at least one
  /// unless the run has finished.
  std::vector<RunEvent> wait_events(const std::string& run_id, std::size_t from,
                                    std::chrono::milliseconds timeout) const;
  /// Blocks until the run is terminal.
  RunRecord wait(const std::string& run_id) const;
  /// Pending steps are skipped and the run ends as aborted.
  void abort(const std::string& run_id);

  std::vector<RunSummary> query_runs(const RunFilter& filter) const { return store_.query(filter); }
  RunComparison compare_runs(const std::string& a, const std::string& b) const;

  std::vector<Submission> submissions() const;
  RunStore& store() noexcept { return store_; }
  const AdapterRegistry& adapters() const noexcept { return adapters_; }

 private:
  struct LiveRun {
    RunRecord record;
    std::vector<RunEvent> events;
    bool abort = false;
    std::map<std::string, std::shared_ptr<const ToolDefinition>> tools;
    WorkflowDefinition workflow;
  };

  void run(std::shared_ptr<LiveRun> live);
  void emit(LiveRun& live, const std::string& step_id, const std::string& event, const std::string& status);
  void persist(const LiveRun& live);
  std::shared_ptr<LiveRun> live_run(const std::string& run_id) const;

  RunStore& store_;
  const ToolResolver& tools_;
  AdapterRegistry adapters_;
  const DatasetStore* datasets_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<IdSource> ids_;
  ExecutorOptions options_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::string, std::shared_ptr<LiveRun>> runs_;
  std::vector<Submission> submissions_;
  std::vector<std::pair<std::shared_ptr<LiveRun>, std::thread>> threads_;
};

/// Steps reachable from `step_id` through dependencies, edges and mappings.
std::set<std::string> downstream_steps(const WorkflowDefinition& workflow, const std::string& step_id);

/// Workflow-level parameters of the invocation with declared defaults filled in.
Json resolve_parameters(const WorkflowDefinition& workflow, const Json& supplied);

}  // namespace schemagate
