#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "schemagate/adapters.hpp"
#include "schemagate/invocation.hpp"

namespace schemagate {

enum class RunStatus { kRunning, kSucceeded, kFailed, kAborted };
enum class StepStatus { kPending, kRunning, kSucceeded, kFailed, kSkipped };

std::string_view run_status_name(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);
std::string_view step_status_name(StepStatus status);
bool is_terminal(RunStatus status);

struct StepResult {
  std::string step_id;
  std::string tool_id;
  StepStatus status = StepStatus::kPending;
  /// Literal values inline; dataframes as {"artifact": "sha256:...", ...}.
  Json outputs = Json::object();
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  std::optional<Json> metrics;
};

struct EnvironmentMetadata {
  std::string engine_version;
  std::string os;
  std::string hostname;
  std::map<std::string, std::string> tool_adapter_versions;
  std::optional<std::uint64_t> seed;
};

/// Engine version, uname and hostname of this process.
EnvironmentMetadata current_environment();

struct RunFailure {
  std::string step_id;
  std::string message;
};

struct RunRecord {
  std::string run_id;
  InvocationObject invocation;
  Json workflow_snapshot;
  std::string workflow_hash;
  Json resolved_parameters = Json::object();
  std::string started_at;
  std::optional<std::string> finished_at;
  EnvironmentMetadata environment;
  RunStatus status = RunStatus::kRunning;
  std::vector<StepResult> steps;
  std::optional<RunFailure> failure;

  const StepResult* step(std::string_view step_id) const;
};

Json to_document(const RunRecord& record);
RunRecord run_from_document(const Json& document);

struct RunEvent {
  std::string run_id;
  std::string step_id;  // empty for run-level events
  std::string event;    // run_started, step_started, step_finished, run_finished
  std::string status;
  std::string timestamp;
};

Json to_document(const RunEvent& event);
RunEvent event_from_document(const Json& document);

struct RunSummary {
  std::string run_id;
  std::string workflow_id;
  SemVer version;
  RunStatus status = RunStatus::kRunning;
  std::string started_at;
  std::optional<std::string> finished_at;
};

Json to_document(const RunSummary& summary);

struct RunFilter {
  std::optional<std::string> workflow_id;
  std::optional<RunStatus> status;
  /// Runs started at or after this timestamp.
  std::optional<std::string> since;
};

struct RunComparison {
  /// key -> [a value, b value]; null where a run lacks the key.
  Json parameter_diff = Json::object();
  /// step -> metric -> b - a, for metrics present in both runs that differ.
  Json metric_diff = Json::object();
  bool same_workflow = false;

  bool empty() const { return parameter_diff.empty() && metric_diff.empty(); }
};

RunComparison compare_records(const RunRecord& a, const RunRecord& b);
Json to_document(const RunComparison& comparison);
std::string render_comparison_text(const RunComparison& comparison);
std::string render_run_text(const RunRecord& record);

/// <root>/runs/<run_id>.json, <root>/runs/<run_id>.events.json,
/// <root>/runs/index.json and content-addressed <root>/artifacts/<sha>.csv.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  /// SCHEMAGATE_RUN_DIR, or ./run-store.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const noexcept { return root_; }

  void save(const RunRecord& record, const std::vector<RunEvent>& events);
  std::optional<RunRecord> load(const std::string& run_id) const;
  std::vector<RunEvent> load_events(const std::string& run_id) const;
  std::vector<RunSummary> index() const;
  std::vector<RunSummary> query(const RunFilter& filter) const;
  std::size_t count() const;
  /// False when the index is unreadable.
  bool healthy() const;

  /// Writes the frame once and returns its reference document.
  Json put_artifact(const DataFrame& frame);
  DataFrame load_artifact(const Json& reference) const;

 private:
  std::filesystem::path runs_dir() const { return root_ / "runs"; }

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

}  // namespace schemagate
