#include "schemagate/provenance.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "schemagate/digest.hpp"
#include "schemagate/error.hpp"
#include "schemagate/fsutil.hpp"

#ifndef SCHEMAGATE_VERSION
#define SCHEMAGATE_VERSION "0.0.0"
#endif

namespace schemagate {

namespace fs = std::filesystem;

namespace {
constexpr std::string_view kRunStatusNames[] = {"running", "succeeded", "failed", "aborted"};
constexpr std::string_view kStepStatusNames[] = {"pending", "running", "succeeded", "failed", "skipped"};

std::optional<StepStatus> parse_step_status(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (kStepStatusNames[i] == text) return static_cast<StepStatus>(i);
  }
  return std::nullopt;
}

Json optional_text(const std::optional<std::string>& text) { return text ? Json(*text) : Json(nullptr); }

std::optional<std::string> text_or_null(const Json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<std::string>();
}
}  // namespace

std::string_view run_status_name(RunStatus status) { return kRunStatusNames[static_cast<int>(status)]; }

std::optional<RunStatus> parse_run_status(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (kRunStatusNames[i] == text) return static_cast<RunStatus>(i);
  }
  return std::nullopt;
}

std::string_view step_status_name(StepStatus status) { return kStepStatusNames[static_cast<int>(status)]; }

bool is_terminal(RunStatus status) { return status != RunStatus::kRunning; }

EnvironmentMetadata current_environment() {
  EnvironmentMetadata env;
  env.engine_version = SCHEMAGATE_VERSION;
  utsname u{};
  env.os = ::uname(&u) == 0 ? std::string(u.sysname) + " " + u.release : "unknown";
  char host[256] = {};
  env.hostname = ::gethostname(host, sizeof host - 1) == 0 ? host : "unknown";
  return env;
}

const StepResult* RunRecord::step(std::string_view step_id) const {
  for (const auto& s : steps) {
    if (s.step_id == step_id) return &s;
  }
  return nullptr;
}

Json to_document(const RunRecord& record) {
  Json doc = Json::object();
  doc["run_id"] = record.run_id;
  doc["status"] = run_status_name(record.status);
  doc["invocation"] = to_document(record.invocation);
  doc["workflow_snapshot"] = {{"document", record.workflow_snapshot}, {"content_hash", record.workflow_hash}};
  doc["resolved_parameters"] = record.resolved_parameters;
  doc["started_at"] = record.started_at;
  doc["finished_at"] = optional_text(record.finished_at);
  Json env = Json::object();
  env["engine_version"] = record.environment.engine_version;
  env["os"] = record.environment.os;
  env["hostname"] = record.environment.hostname;
  env["tool_adapter_versions"] = Json::object();
  for (const auto& [tool, version] : record.environment.tool_adapter_versions) {
    env["tool_adapter_versions"][tool] = version;
  }
  env["seed"] = record.environment.seed ? Json(*record.environment.seed) : Json(nullptr);
  doc["environment"] = std::move(env);
  Json steps = Json::array();
  for (const auto& s : record.steps) {
    Json step = Json::object();
    step["step_id"] = s.step_id;
    step["tool_id"] = s.tool_id;
    step["status"] = step_status_name(s.status);
    step["outputs"] = s.outputs;
    step["started_at"] = optional_text(s.started_at);
    step["finished_at"] = optional_text(s.finished_at);
    step["metrics"] = s.metrics ? *s.metrics : Json(nullptr);
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  doc["failure"] = record.failure ? Json{{"step_id", record.failure->step_id}, {"message", record.failure->message}}
                                  : Json(nullptr);
  return doc;
}

RunRecord run_from_document(const Json& doc) {
  RunRecord r;
  try {
    r.run_id = doc.at("run_id").get<std::string>();
    auto status = parse_run_status(doc.at("status").get<std::string>());
    if (!status) throw StorageError("bad run status in " + r.run_id);
    r.status = *status;
    r.invocation = invocation_from_document(doc.at("invocation"));
    r.workflow_snapshot = doc.at("workflow_snapshot").at("document");
    r.workflow_hash = doc.at("workflow_snapshot").at("content_hash").get<std::string>();
    r.resolved_parameters = doc.at("resolved_parameters");
    r.started_at = doc.at("started_at").get<std::string>();
    r.finished_at = text_or_null(doc, "finished_at");
    const auto& env = doc.at("environment");
    r.environment.engine_version = env.at("engine_version").get<std::string>();
    r.environment.os = env.at("os").get<std::string>();
    r.environment.hostname = env.at("hostname").get<std::string>();
    for (const auto& [tool, version] : env.at("tool_adapter_versions").items()) {
      r.environment.tool_adapter_versions[tool] = version.get<std::string>();
    }
    if (env.contains("seed") && !env["seed"].is_null()) r.environment.seed = env["seed"].get<std::uint64_t>();
    for (const auto& s : doc.at("steps")) {
      StepResult step;
      step.step_id = s.at("step_id").get<std::string>();
      step.tool_id = s.value("tool_id", "");
      step.status = parse_step_status(s.at("status").get<std::string>()).value_or(StepStatus::kPending);
      step.outputs = s.at("outputs");
      step.started_at = text_or_null(s, "started_at");
      step.finished_at = text_or_null(s, "finished_at");
      if (s.contains("metrics") && !s["metrics"].is_null()) step.metrics = s["metrics"];
      r.steps.push_back(std::move(step));
    }
    if (doc.contains("failure") && !doc["failure"].is_null()) {
      r.failure = RunFailure{doc["failure"].at("step_id").get<std::string>(),
                             doc["failure"].at("message").get<std::string>()};
    }
  } catch (const Json::exception& e) {
    throw StorageError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

Json to_document(const RunEvent& event) {
  Json doc = Json::object();
  doc["run_id"] = event.run_id;
  doc["step_id"] = event.step_id.empty() ? Json(nullptr) : Json(event.step_id);
  doc["event"] = event.event;
  doc["status"] = event.status;
  doc["timestamp"] = event.timestamp;
  return doc;
}

RunEvent event_from_document(const Json& doc) {
  RunEvent e;
  e.run_id = doc.at("run_id").get<std::string>();
  e.step_id = doc.at("step_id").is_null() ? "" : doc["step_id"].get<std::string>();
  e.event = doc.at("event").get<std::string>();
  e.status = doc.at("status").get<std::string>();
  e.timestamp = doc.at("timestamp").get<std::string>();
  return e;
}

Json to_document(const RunSummary& summary) {
  Json doc = Json::object();
  doc["run_id"] = summary.run_id;
  doc["workflow_id"] = summary.workflow_id;
  doc["version"] = summary.version.str();
  doc["status"] = run_status_name(summary.status);
  doc["started_at"] = summary.started_at;
  doc["finished_at"] = optional_text(summary.finished_at);
  return doc;
}

namespace {

RunSummary summary_from_document(const Json& doc) {
  RunSummary s;
  s.run_id = doc.at("run_id").get<std::string>();
  s.workflow_id = doc.at("workflow_id").get<std::string>();
  s.version = SemVer::parse(doc.at("version").get<std::string>()).value_or(SemVer{});
  s.status = parse_run_status(doc.at("status").get<std::string>()).value_or(RunStatus::kRunning);
  s.started_at = doc.at("started_at").get<std::string>();
  s.finished_at = text_or_null(doc, "finished_at");
  return s;
}

RunSummary summarise(const RunRecord& r) {
  return RunSummary{r.run_id, r.invocation.workflow_id, r.invocation.version, r.status, r.started_at, r.finished_at};
}

}  // namespace

RunComparison compare_records(const RunRecord& a, const RunRecord& b) {
  RunComparison out;
  out.same_workflow = a.workflow_hash == b.workflow_hash;
  std::set<std::string> keys;
  for (const auto& [k, _] : a.resolved_parameters.items()) keys.insert(k);
  for (const auto& [k, _] : b.resolved_parameters.items()) keys.insert(k);
  for (const auto& k : keys) {
    const Json av = a.resolved_parameters.contains(k) ? a.resolved_parameters[k] : Json(nullptr);
    const Json bv = b.resolved_parameters.contains(k) ? b.resolved_parameters[k] : Json(nullptr);
    if (av != bv) out.parameter_diff[k] = Json::array({av, bv});
  }
  for (const auto& sa : a.steps) {
    const auto* sb = b.step(sa.step_id);
    if (!sa.metrics || !sb || !sb->metrics) continue;
    Json deltas = Json::object();
    for (const auto& [m, av] : sa.metrics->items()) {
      if (!av.is_number() || !sb->metrics->contains(m) || !(*sb->metrics)[m].is_number()) continue;
      const double delta = (*sb->metrics)[m].get<double>() - av.get<double>();
      if (delta != 0.0) deltas[m] = delta;
    }
    if (!deltas.empty()) out.metric_diff[sa.step_id] = std::move(deltas);
  }
  return out;
}

Json to_document(const RunComparison& comparison) {
  Json doc = Json::object();
  doc["parameter_diff"] = comparison.parameter_diff;
  doc["metric_diff"] = comparison.metric_diff;
  doc["same_workflow"] = comparison.same_workflow;
  return doc;
}

std::string render_comparison_text(const RunComparison& c) {
  std::ostringstream out;
  out << "same workflow: " << (c.same_workflow ? "yes" : "no") << "\n";
  if (c.empty()) {
    out << "no differences\n";
    return out.str();
  }
  for (const auto& [k, pair] : c.parameter_diff.items()) {
    out << "parameter " << k << ": " << pair[0].dump() << " -> " << pair[1].dump() << "\n";
  }
  for (const auto& [step, metrics] : c.metric_diff.items()) {
    for (const auto& [m, delta] : metrics.items()) {
      const double d = delta.get<double>();
      out << "metric " << step << "." << m << ": " << (d > 0 ? "+" : "") << format_number(d) << "\n";
    }
  }
  return out.str();
}

std::string render_run_text(const RunRecord& r) {
  std::ostringstream out;
  out << "run " << r.run_id << "\n"
      << "  workflow   " << r.invocation.workflow_id << " " << r.invocation.version.str() << "\n"
      << "  status     " << run_status_name(r.status) << "\n"
      << "  started    " << r.started_at << "\n"
      << "  finished   " << r.finished_at.value_or("-") << "\n"
      << "  snapshot   sha256:" << r.workflow_hash << "\n"
      << "  engine     " << r.environment.engine_version << " on " << r.environment.os << " ("
      << r.environment.hostname << ")\n"
      << "  parameters " << r.resolved_parameters.dump() << "\n";
  for (const auto& s : r.steps) {
    out << "  step " << s.step_id << " [" << step_status_name(s.status) << "]";
    if (s.metrics) out << " metrics " << s.metrics->dump();
    out << "\n";
  }
  if (r.failure) out << "  failure    " << r.failure->step_id << ": " << r.failure->message << "\n";
  return out.str();
}

// ---------------------------------------------------------------- RunStore

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(runs_dir(), ec);
  fs::create_directories(root_ / "artifacts", ec);
  if (ec) throw StorageError("cannot create run store at " + root_.string() + ": " + ec.message());
}

fs::path RunStore::default_root() {
  if (const char* env = std::getenv("SCHEMAGATE_RUN_DIR"); env && *env) return env;
  return fs::path("run-store");
}

void RunStore::save(const RunRecord& record, const std::vector<RunEvent>& events) {
  std::lock_guard lock(mu_);
  FileLock file_lock(runs_dir() / ".lock");
  write_file_atomic(runs_dir() / (record.run_id + ".json"), render_document(to_document(record)));
  Json evs = Json::array();
  for (const auto& e : events) evs.push_back(to_document(e));
  write_file_atomic(runs_dir() / (record.run_id + ".events.json"), render_document(evs));

  Json index = Json::object({{"runs", Json::array()}});
  const auto index_path = runs_dir() / "index.json";
  if (fs::exists(index_path)) index = Json::parse(read_file(index_path));
  auto& runs = index["runs"];
  bool replaced = false;
  for (auto& entry : runs) {
    if (entry.at("run_id") == record.run_id) {
      entry = to_document(summarise(record));
      replaced = true;
    }
  }
  if (!replaced) runs.push_back(to_document(summarise(record)));
  write_file_atomic(index_path, render_document(index));
}

std::optional<RunRecord> RunStore::load(const std::string& run_id) const {
  const auto path = runs_dir() / (run_id + ".json");
  if (run_id.empty() || run_id.find('/') != std::string::npos || !fs::exists(path)) return std::nullopt;
  return run_from_document(Json::parse(read_file(path)));
}

std::vector<RunEvent> RunStore::load_events(const std::string& run_id) const {
  std::vector<RunEvent> out;
  const auto path = runs_dir() / (run_id + ".events.json");
  if (run_id.find('/') != std::string::npos || !fs::exists(path)) return out;
  for (const auto& e : Json::parse(read_file(path))) out.push_back(event_from_document(e));
  return out;
}

std::vector<RunSummary> RunStore::index() const {
  std::lock_guard lock(mu_);
  const auto path = runs_dir() / "index.json";
  std::vector<RunSummary> out;
  if (!fs::exists(path)) return out;
  try {
    const auto doc = Json::parse(read_file(path));
    for (const auto& e : doc.at("runs")) out.push_back(summary_from_document(e));
  } catch (const Json::exception& e) {
    throw StorageError(std::string("run index is corrupt: ") + e.what());
  }
  return out;
}

std::vector<RunSummary> RunStore::query(const RunFilter& filter) const {
  std::vector<RunSummary> out;
  for (auto& s : index()) {
    if (filter.workflow_id && s.workflow_id != *filter.workflow_id) continue;
    if (filter.status && s.status != *filter.status) continue;
    if (filter.since && s.started_at < *filter.since) continue;
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.started_at != b.started_at ? a.started_at > b.started_at : a.run_id < b.run_id;
  });
  return out;
}

std::size_t RunStore::count() const { return index().size(); }

bool RunStore::healthy() const {
  try {
    index();
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Json RunStore::put_artifact(const DataFrame& frame) {
  const auto csv = frame.to_csv();
  const auto hash = sha256_hex(csv);
  const auto path = root_ / "artifacts" / (hash + ".csv");
  {
    std::lock_guard lock(mu_);
    if (!fs::exists(path)) write_file_atomic(path, csv);
  }
  Json ref = Json::object();
  ref["artifact"] = "sha256:" + hash;
  ref["format"] = "csv";
  ref["rows"] = frame.rows();
  ref["columns"] = frame.column_names();
  return ref;
}

DataFrame RunStore::load_artifact(const Json& reference) const {
  const auto id = reference.at("artifact").get<std::string>();
  if (id.rfind("sha256:", 0) != 0) throw NotFound("unknown artifact " + id);
  const auto path = root_ / "artifacts" / (id.substr(7) + ".csv");
  if (!fs::exists(path)) throw NotFound("artifact " + id + " is not in the store");
  return DataFrame::read_csv(path);
}

}  // namespace schemagate
