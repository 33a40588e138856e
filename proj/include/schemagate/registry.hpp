#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "schemagate/clock.hpp"
#include "schemagate/dataframe.hpp"
#include "schemagate/definitions.hpp"
#include "schemagate/resolver.hpp"
#include "schemagate/validation.hpp"

namespace schemagate {

enum class EntryStatus { kDraft, kPublished, kRetired };

std::string_view status_name(EntryStatus status);
std::optional<EntryStatus> parse_status(std::string_view text);

struct EntryRecord {
  std::string id;
  SemVer version;
  EntryStatus status = EntryStatus::kDraft;
  std::string content_hash;
  std::string admitted_at;
};

struct AdmissionReport {
  std::string candidate_id;
  SemVer version;
  std::vector<CheckResult> checks;
  bool admitted = false;
};

Json to_document(const AdmissionReport& report);
std::string render_report_text(const AdmissionReport& report);

enum class ProbeMode { kDeclaredStub, kEndpointPing };

struct HealthProbe {
  std::string tool_id;
  ProbeMode mode = ProbeMode::kDeclaredStub;
  /// host:port, tcp://host:port or http(s)://host[:port]/...; set iff endpoint-ping.
  std::optional<std::string> endpoint;
  int timeout_ms = 1000;

  static HealthProbe declared_stub(std::string tool_id);
  static HealthProbe endpoint_ping(std::string tool_id, std::string endpoint, int timeout_ms = 1000);
};

/// Empty on success; otherwise service_availability errors.
Diagnostics run_probe(const HealthProbe& probe);

struct DatasetDescriptor {
  std::string dataset_id;
  std::string name;
  std::string format = "csv";
  std::vector<std::string> columns;
  std::size_t row_count = 0;
  std::string uri;
};

Json to_document(const DatasetDescriptor& dataset);

/// CSV datasets under `<root>/datasets`, indexed by `index.json`.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path dir);

  /// Copies `csv` into the store. The id is generated unless given.
  DatasetDescriptor add(const std::filesystem::path& csv, std::optional<std::string> name = std::nullopt,
                        std::optional<std::string> dataset_id = std::nullopt);
  /// Sorted by name, then id.
  std::vector<DatasetDescriptor> list() const;
  /// Lookup by UUID or by name.
  std::optional<DatasetDescriptor> find(const std::string& id_or_name) const;
  DataFrame load(const std::string& id_or_name) const;

 private:
  std::vector<DatasetDescriptor> read_index() const;
  void write_index(const std::vector<DatasetDescriptor>& entries) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
};

struct WorkflowHit {
  std::string workflow_id;
  SemVer version;
  std::string name;
  int score = 0;
};

struct IntegrityIssue {
  std::string kind;  // "tool" or "workflow"
  std::string id;
  SemVer version;
  std::string message;
};

/// Directory-backed registry:
///
///   <root>/tools/<id>/<version>.json
///   <root>/workflows/<id>/<version>.json
///   <root>/manifest.json           id -> version -> {status, content_hash, admitted_at}
///   <root>/datasets/...            see DatasetStore
///
/// Documents are stored in canonical form. Readers share an in-process lock;
/// writers serialise on it and on an advisory file lock so that separate
/// processes do not interleave manifest updates.
class Registry final : public ToolResolver {
 public:
  explicit Registry(std::filesystem::path root, std::shared_ptr<Clock> clock = nullptr);

  /// SCHEMAGATE_REGISTRY_DIR, or ./registry.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Runs the three admission checks; publishes iff all pass.
  AdmissionReport admit_tool(const ToolDefinition& candidate, const HealthProbe& probe);
  /// Decodes first; structural failures fail parameter_consistency.
  AdmissionReport admit_tool_document(const Json& document, const std::optional<HealthProbe>& probe = {});
  AdmissionReport admit_workflow(const WorkflowDefinition& candidate);
  /// Admission checks without persisting anything.
  AdmissionReport evaluate_tool(const ToolDefinition& candidate, const HealthProbe& probe) const;
  AdmissionReport evaluate_workflow(const WorkflowDefinition& candidate) const;

  /// Stores a draft entry (never visible to resolve or search).
  void stage_tool(const ToolDefinition& tool);
  void stage_workflow(const WorkflowDefinition& workflow);
  void retire_tool(const std::string& id, const SemVer& version);
  void retire_workflow(const std::string& id, const SemVer& version);

  /// Published definition; latest when `version` is empty. NotFound/Retired.
  ToolDefinition resolve_tool(const std::string& id, const std::optional<SemVer>& version = {}) const;
  WorkflowDefinition resolve_workflow(const std::string& id, const std::optional<SemVer>& version = {}) const;

  ToolLookup lookup_tool(const std::string& tool_id) const override;

  std::vector<WorkflowHit> search_workflows(const std::string& query,
                                            const std::vector<std::string>& tags = {}) const;
  ParameterSchema get_parameters(const std::string& workflow_id, const std::optional<SemVer>& version = {}) const;

  std::vector<EntryRecord> list_tools() const;
  std::vector<EntryRecord> list_workflows() const;

  /// Re-hashes every stored document against the manifest.
  std::vector<IntegrityIssue> integrity_scan() const;
  /// Digest of the manifest; changes whenever any entry changes.
  std::string fingerprint() const;

  /// Re-reads the manifest written by other processes.
  void refresh();

  DatasetStore& datasets() noexcept { return datasets_; }
  const DatasetStore& datasets() const noexcept { return datasets_; }

 private:
  using VersionMap = std::map<SemVer, EntryRecord>;
  using Section = std::map<std::string, VersionMap>;
  struct Manifest {
    Section tools;
    Section workflows;
  };

  Manifest read_manifest() const;
  void write_manifest(const Manifest& manifest) const;
  std::filesystem::path document_path(std::string_view kind, const std::string& id, const SemVer& version) const;
  void store(std::string_view kind, const std::string& id, const SemVer& version, const std::string& text,
             EntryStatus status);
  void set_status(std::string_view kind, const std::string& id, const SemVer& version, EntryStatus status);
  const EntryRecord& published_record(const Section& section, std::string_view kind, const std::string& id,
                                      const std::optional<SemVer>& version) const;
  std::string read_document(std::string_view kind, const std::string& id, const SemVer& version) const;
  std::shared_ptr<const ToolDefinition> load_tool(const std::string& id, const SemVer& version) const;
  std::shared_ptr<const WorkflowDefinition> load_workflow(const std::string& id, const SemVer& version) const;

  std::filesystem::path root_;
  std::shared_ptr<Clock> clock_;
  DatasetStore datasets_;
  mutable std::shared_mutex mu_;
  Manifest manifest_;
  mutable std::map<std::pair<std::string, SemVer>, std::shared_ptr<const ToolDefinition>> tool_cache_;
  mutable std::map<std::pair<std::string, SemVer>, std::shared_ptr<const WorkflowDefinition>> workflow_cache_;
  mutable std::mutex cache_mu_;
};

}  // namespace schemagate
