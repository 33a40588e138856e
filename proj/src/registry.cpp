#include "schemagate/registry.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "schemagate/digest.hpp"
#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/fsutil.hpp"

namespace schemagate {

namespace fs = std::filesystem;

std::string_view status_name(EntryStatus status) {
  switch (status) {
    case EntryStatus::kDraft: return "draft";
    case EntryStatus::kPublished: return "published";
    case EntryStatus::kRetired: return "retired";
  }
  return "draft";
}

std::optional<EntryStatus> parse_status(std::string_view text) {
  if (text == "draft") return EntryStatus::kDraft;
  if (text == "published") return EntryStatus::kPublished;
  if (text == "retired") return EntryStatus::kRetired;
  return std::nullopt;
}

Json to_document(const AdmissionReport& report) {
  Json doc = Json::object();
  doc["candidate_id"] = report.candidate_id;
  doc["version"] = report.version.str();
  Json checks_doc = Json::array();
  for (const auto& c : report.checks) {
    Json entry = Json::object();
    entry["check"] = c.check;
    entry["outcome"] = c.passed() ? "pass" : "fail";
    entry["diagnostics"] = to_document(c.diagnostics);
    checks_doc.push_back(std::move(entry));
  }
  doc["checks"] = std::move(checks_doc);
  doc["admitted"] = report.admitted;
  return doc;
}

std::string render_report_text(const AdmissionReport& report) {
  std::ostringstream out;
  out << report.candidate_id << " " << report.version.str() << ": " << (report.admitted ? "admitted" : "REJECTED")
      << "\n";
  for (const auto& c : report.checks) {
    out << "  " << (c.passed() ? "pass" : "FAIL") << "  " << c.check << "\n";
    for (const auto& d : c.diagnostics) out << "        " << render_diagnostic(d) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- probes

HealthProbe HealthProbe::declared_stub(std::string tool_id) {
  return HealthProbe{std::move(tool_id), ProbeMode::kDeclaredStub, std::nullopt, 1000};
}

HealthProbe HealthProbe::endpoint_ping(std::string tool_id, std::string endpoint, int timeout_ms) {
  return HealthProbe{std::move(tool_id), ProbeMode::kEndpointPing, std::move(endpoint), timeout_ms};
}

namespace {

bool split_endpoint(std::string endpoint, std::string& host, std::string& port) {
  std::string default_port;
  if (auto pos = endpoint.find("://"); pos != std::string::npos) {
    const auto scheme = endpoint.substr(0, pos);
    if (scheme == "http") default_port = "80";
    if (scheme == "https") default_port = "443";
    endpoint = endpoint.substr(pos + 3);
  }
  if (auto slash = endpoint.find('/'); slash != std::string::npos) endpoint.resize(slash);
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) {
    host = endpoint;
    port = default_port;
  } else {
    host = endpoint.substr(0, colon);
    port = endpoint.substr(colon + 1);
  }
  if (host.size() > 1 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return !host.empty() && !port.empty() &&
         std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string tcp_connect(const std::string& host, const std::string& port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    return std::string("cannot resolve host: ") + ::gai_strerror(rc);
  }
  std::string last = "no addresses";
  for (auto* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_NONBLOCK | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last = std::strerror(errno);
      continue;
    }
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, timeout_ms);
      if (rc == 0) {
        last = "timed out after " + std::to_string(timeout_ms) + " ms";
        ::close(fd);
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      if (err) errno = err;
    }
    if (rc == 0) {
      ::close(fd);
      ::freeaddrinfo(res);
      return {};
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  return last;
}

}  // namespace

Diagnostics run_probe(const HealthProbe& probe) {
  Diagnostics out;
  if (probe.mode == ProbeMode::kDeclaredStub) {
    if (probe.endpoint) {
      out.push_back(error_at(checks::kServiceAvailability, "probe.endpoint",
                             "declared-stub probe must not carry an endpoint"));
    }
    return out;
  }
  if (!probe.endpoint) {
    out.push_back(error_at(checks::kServiceAvailability, "probe.endpoint", "endpoint-ping probe needs an endpoint"));
    return out;
  }
  std::string host, port;
  if (!split_endpoint(*probe.endpoint, host, port)) {
    out.push_back(error_at(checks::kServiceAvailability, "probe.endpoint",
                           "cannot parse endpoint '" + *probe.endpoint + "'"));
    return out;
  }
  if (auto err = tcp_connect(host, port, probe.timeout_ms); !err.empty()) {
    out.push_back(error_at(checks::kServiceAvailability, "probe.endpoint",
                           "tool '" + probe.tool_id + "' unreachable at " + *probe.endpoint + ": " + err));
  }
  return out;
}

// ---------------------------------------------------------------- datasets

Json to_document(const DatasetDescriptor& d) {
  Json doc = Json::object();
  doc["dataset_id"] = d.dataset_id;
  doc["name"] = d.name;
  doc["format"] = d.format;
  doc["columns"] = d.columns;
  doc["row_count"] = d.row_count;
  doc["uri"] = d.uri;
  return doc;
}

DatasetStore::DatasetStore(fs::path dir) : dir_(std::move(dir)) {}

std::vector<DatasetDescriptor> DatasetStore::read_index() const {
  std::vector<DatasetDescriptor> out;
  const auto index = dir_ / "index.json";
  if (!fs::exists(index)) return out;
  try {
    const auto doc = Json::parse(read_file(index));
    for (const auto& e : doc.at("datasets")) {
      DatasetDescriptor d;
      d.dataset_id = e.at("dataset_id").get<std::string>();
      d.name = e.at("name").get<std::string>();
      d.format = e.value("format", "csv");
      d.columns = e.at("columns").get<std::vector<std::string>>();
      d.row_count = e.at("row_count").get<std::size_t>();
      d.uri = (dir_ / e.at("file").get<std::string>()).string();
      out.push_back(std::move(d));
    }
  } catch (const Json::exception& e) {
    throw StorageError("corrupt dataset index " + index.string() + ": " + e.what());
  }
  return out;
}

void DatasetStore::write_index(const std::vector<DatasetDescriptor>& entries) const {
  Json list = Json::array();
  for (const auto& d : entries) {
    Json e = Json::object();
    e["dataset_id"] = d.dataset_id;
    e["name"] = d.name;
    e["format"] = d.format;
    e["columns"] = d.columns;
    e["row_count"] = d.row_count;
    e["file"] = fs::path(d.uri).filename().string();
    list.push_back(std::move(e));
  }
  Json doc = Json::object();
  doc["datasets"] = std::move(list);
  write_file_atomic(dir_ / "index.json", render_document(doc));
}

DatasetDescriptor DatasetStore::add(const fs::path& csv, std::optional<std::string> name,
                                    std::optional<std::string> dataset_id) {
  const DataFrame frame = [&] {
    try {
      return DataFrame::read_csv(csv);
    } catch (const std::invalid_argument& e) {
      throw StorageError(csv.string() + ": " + e.what());
    }
  }();
  DatasetDescriptor d;
  if (dataset_id) {
    if (!is_uuid(*dataset_id)) throw StorageError("dataset id '" + *dataset_id + "' is not a UUID");
    d.dataset_id = *dataset_id;
  } else {
    d.dataset_id = RandomIdSource().next_uuid();
  }
  d.name = name ? *name : csv.filename().string();
  d.columns = frame.column_names();
  d.row_count = frame.rows();

  std::unique_lock lock(mu_);
  FileLock file_lock(dir_ / ".lock");
  auto entries = read_index();
  for (const auto& e : entries) {
    if (e.dataset_id == d.dataset_id) throw StorageError("dataset id " + d.dataset_id + " already registered");
    if (e.name == d.name) throw StorageError("dataset name '" + d.name + "' already registered");
  }
  const auto target = dir_ / (d.dataset_id + ".csv");
  write_file_atomic(target, read_file(csv));
  d.uri = target.string();
  entries.push_back(d);
  write_index(entries);
  return d;
}

std::vector<DatasetDescriptor> DatasetStore::list() const {
  std::shared_lock lock(mu_);
  auto entries = read_index();
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.name, a.dataset_id) < std::tie(b.name, b.dataset_id);
  });
  return entries;
}

std::optional<DatasetDescriptor> DatasetStore::find(const std::string& id_or_name) const {
  std::shared_lock lock(mu_);
  for (auto& e : read_index()) {
    if (e.dataset_id == id_or_name || e.name == id_or_name) return e;
  }
  return std::nullopt;
}

DataFrame DatasetStore::load(const std::string& id_or_name) const {
  auto d = find(id_or_name);
  if (!d) throw NotFound("dataset '" + id_or_name + "' is not registered");
  try {
    return DataFrame::read_csv(d->uri);
  } catch (const std::invalid_argument& e) {
    throw StorageError(d->uri + ": " + e.what());
  }
}

// ---------------------------------------------------------------- registry

namespace {

constexpr std::string_view kTools = "tools";
constexpr std::string_view kWorkflows = "workflows";

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::set<std::string> token_set(const std::vector<std::string>& texts) {
  std::set<std::string> out;
  for (const auto& t : texts) {
    for (auto& tok : tokens(t)) out.insert(std::move(tok));
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Registry::Registry(fs::path root, std::shared_ptr<Clock> clock)
    : root_(std::move(root)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      datasets_(root_ / "datasets") {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StorageError("cannot create registry directory " + root_.string() + ": " + ec.message());
  manifest_ = read_manifest();
}

fs::path Registry::default_root() {
  if (const char* env = std::getenv("SCHEMAGATE_REGISTRY_DIR"); env && *env) return env;
  return fs::current_path() / "registry";
}

Registry::Manifest Registry::read_manifest() const {
  Manifest m;
  const auto path = root_ / "manifest.json";
  if (!fs::exists(path)) return m;
  try {
    const auto doc = Json::parse(read_file(path));
    auto load = [&](std::string_view kind, Section& section) {
      if (!doc.contains(kind)) return;
      for (const auto& [id, versions] : doc.at(kind).items()) {
        for (const auto& [ver, e] : versions.items()) {
          auto v = SemVer::parse(ver);
          auto st = parse_status(e.at("status").get<std::string>());
          if (!v || !st) throw StorageError("manifest entry " + id + "@" + ver + " is malformed");
          section[id][*v] = EntryRecord{id, *v, *st, e.at("content_hash").get<std::string>(),
                                        e.at("admitted_at").get<std::string>()};
        }
      }
    };
    load(kTools, m.tools);
    load(kWorkflows, m.workflows);
  } catch (const Json::exception& e) {
    throw StorageError("corrupt manifest " + path.string() + ": " + e.what());
  }
  return m;
}

namespace {
Json section_document(const std::map<std::string, std::map<SemVer, EntryRecord>>& section) {
  Json out = Json::object();
  for (const auto& [id, versions] : section) {
    Json vs = Json::object();
    for (const auto& [v, e] : versions) {
      Json entry = Json::object();
      entry["status"] = status_name(e.status);
      entry["content_hash"] = e.content_hash;
      entry["admitted_at"] = e.admitted_at;
      vs[v.str()] = std::move(entry);
    }
    out[id] = std::move(vs);
  }
  return out;
}
}  // namespace

void Registry::write_manifest(const Manifest& manifest) const {
  Json doc = Json::object();
  doc["tools"] = section_document(manifest.tools);
  doc["workflows"] = section_document(manifest.workflows);
  write_file_atomic(root_ / "manifest.json", render_document(doc));
}

void Registry::refresh() {
  auto fresh = read_manifest();
  std::unique_lock lock(mu_);
  manifest_ = std::move(fresh);
}

fs::path Registry::document_path(std::string_view kind, const std::string& id, const SemVer& version) const {
  return root_ / kind / id / (version.str() + ".json");
}

std::string Registry::read_document(std::string_view kind, const std::string& id, const SemVer& version) const {
  return read_file(document_path(kind, id, version));
}

void Registry::store(std::string_view kind, const std::string& id, const SemVer& version, const std::string& text,
                     EntryStatus status) {
  std::unique_lock lock(mu_);
  FileLock file_lock(root_ / ".lock");
  manifest_ = read_manifest();
  Section& section = kind == kTools ? manifest_.tools : manifest_.workflows;
  if (auto id_it = section.find(id); id_it != section.end()) {
    if (auto v_it = id_it->second.find(version); v_it != id_it->second.end()) {
      if (v_it->second.status != EntryStatus::kDraft) {
        throw DuplicateVersion(std::string(kind == kTools ? "tool" : "workflow") + " '" + id + "' version " +
                               version.str() + " is already " + std::string(status_name(v_it->second.status)));
      }
    }
  }
  write_file_atomic(document_path(kind, id, version), text);
  section[id][version] = EntryRecord{id, version, status, sha256_hex(text), clock_->now()};
  write_manifest(manifest_);
  std::lock_guard cache_lock(cache_mu_);
  tool_cache_.erase({id, version});
  workflow_cache_.erase({id, version});
}

void Registry::set_status(std::string_view kind, const std::string& id, const SemVer& version, EntryStatus status) {
  std::unique_lock lock(mu_);
  FileLock file_lock(root_ / ".lock");
  manifest_ = read_manifest();
  Section& section = kind == kTools ? manifest_.tools : manifest_.workflows;
  auto id_it = section.find(id);
  if (id_it == section.end() || !id_it->second.count(version)) {
    throw NotFound(std::string(kind == kTools ? "tool" : "workflow") + " '" + id + "' version " + version.str() +
                   " is not in the registry");
  }
  id_it->second[version].status = status;
  write_manifest(manifest_);
}

const EntryRecord& Registry::published_record(const Section& section, std::string_view kind, const std::string& id,
                                              const std::optional<SemVer>& version) const {
  const std::string what = std::string(kind == kTools ? "tool" : "workflow") + " '" + id + "'";
  auto id_it = section.find(id);
  if (id_it == section.end()) throw NotFound(what + " is not in the registry");
  const auto& versions = id_it->second;
  if (version) {
    auto v_it = versions.find(*version);
    if (v_it == versions.end()) throw NotFound(what + " has no version " + version->str());
    if (v_it->second.status == EntryStatus::kRetired) throw Retired(what + " version " + version->str() + " is retired");
    if (v_it->second.status != EntryStatus::kPublished) {
      throw NotFound(what + " version " + version->str() + " is not published");
    }
    return v_it->second;
  }
  bool any_retired = false;
  for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
    if (it->second.status == EntryStatus::kPublished) return it->second;
    any_retired = any_retired || it->second.status == EntryStatus::kRetired;
  }
  if (any_retired) throw Retired(what + " has no published version (retired)");
  throw NotFound(what + " has no published version");
}

std::shared_ptr<const ToolDefinition> Registry::load_tool(const std::string& id, const SemVer& version) const {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = tool_cache_.find({id, version}); it != tool_cache_.end()) return it->second;
  }
  auto parsed = parse_tool_definition_text(read_document(kTools, id, version));
  if (!parsed) {
    throw IntegrityError("stored tool " + id + "@" + version.str() + " no longer parses: " +
                         render_diagnostic(parsed.diagnostics().front()));
  }
  auto ptr = std::make_shared<const ToolDefinition>(std::move(parsed).value());
  std::lock_guard lock(cache_mu_);
  tool_cache_[{id, version}] = ptr;
  return ptr;
}

std::shared_ptr<const WorkflowDefinition> Registry::load_workflow(const std::string& id,
                                                                  const SemVer& version) const {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = workflow_cache_.find({id, version}); it != workflow_cache_.end()) return it->second;
  }
  auto parsed = parse_workflow_definition_text(read_document(kWorkflows, id, version));
  if (!parsed) {
    throw IntegrityError("stored workflow " + id + "@" + version.str() + " no longer parses: " +
                         render_diagnostic(parsed.diagnostics().front()));
  }
  auto ptr = std::make_shared<const WorkflowDefinition>(std::move(parsed).value());
  std::lock_guard lock(cache_mu_);
  workflow_cache_[{id, version}] = ptr;
  return ptr;
}

AdmissionReport Registry::evaluate_tool(const ToolDefinition& candidate, const HealthProbe& probe) const {
  AdmissionReport report;
  report.candidate_id = candidate.id;
  report.version = candidate.version;
  CheckResult consistency{std::string(checks::kParameterConsistency), {}};
  CheckResult documentation{std::string(checks::kDocumentationCompleteness), {}};
  for (auto& d : check_tool_invariants(candidate)) {
    (d.check == checks::kDocumentationCompleteness ? documentation : consistency).diagnostics.push_back(d);
  }
  CheckResult availability{std::string(checks::kServiceAvailability), run_probe(probe)};
  if (probe.tool_id != candidate.id) {
    availability.diagnostics.push_back(error_at(checks::kServiceAvailability, "probe.tool_id",
                                                "probe is for '" + probe.tool_id + "', not '" + candidate.id + "'"));
  }
  report.checks = {std::move(consistency), std::move(documentation), std::move(availability)};
  report.admitted = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const CheckResult& c) { return c.passed(); });
  return report;
}

AdmissionReport Registry::evaluate_workflow(const WorkflowDefinition& candidate) const {
  const auto validation = validate_workflow(candidate, *this);
  AdmissionReport report;
  report.candidate_id = candidate.workflow_id;
  report.version = candidate.version;
  report.checks = validation.checks;
  report.admitted = validation.valid;
  return report;
}

AdmissionReport Registry::admit_tool(const ToolDefinition& candidate, const HealthProbe& probe) {
  auto report = evaluate_tool(candidate, probe);
  if (report.admitted) {
    store(kTools, candidate.id, candidate.version, canonical_text(candidate), EntryStatus::kPublished);
  } else {
    // A rejected candidate that collides with a published version is still a duplicate.
    std::shared_lock lock(mu_);
    auto it = manifest_.tools.find(candidate.id);
    if (it != manifest_.tools.end()) {
      auto v = it->second.find(candidate.version);
      if (v != it->second.end() && v->second.status != EntryStatus::kDraft) {
        throw DuplicateVersion("tool '" + candidate.id + "' version " + candidate.version.str() + " is already " +
                               std::string(status_name(v->second.status)));
      }
    }
  }
  return report;
}

AdmissionReport Registry::admit_tool_document(const Json& document, const std::optional<HealthProbe>& probe) {
  auto decoded = decode_tool_definition(document);
  if (!decoded.tool || has_errors(decoded.diagnostics)) {
    AdmissionReport report;
    report.candidate_id = document.is_object() && document.contains("id") && document["id"].is_string()
                              ? document["id"].get<std::string>()
                              : std::string{};
    if (document.is_object() && document.contains("version") && document["version"].is_string()) {
      report.version = SemVer::parse(document["version"].get<std::string>()).value_or(SemVer{});
    }
    report.checks.push_back({std::string(checks::kParameterConsistency), decoded.diagnostics});
    report.admitted = false;
    return report;
  }
  return admit_tool(*decoded.tool, probe ? *probe : HealthProbe::declared_stub(decoded.tool->id));
}

AdmissionReport Registry::admit_workflow(const WorkflowDefinition& candidate) {
  auto report = evaluate_workflow(candidate);
  if (report.admitted) {
    store(kWorkflows, candidate.workflow_id, candidate.version, canonical_text(candidate), EntryStatus::kPublished);
  } else {
    std::shared_lock lock(mu_);
    auto it = manifest_.workflows.find(candidate.workflow_id);
    if (it != manifest_.workflows.end()) {
      auto v = it->second.find(candidate.version);
      if (v != it->second.end() && v->second.status != EntryStatus::kDraft) {
        throw DuplicateVersion("workflow '" + candidate.workflow_id + "' version " + candidate.version.str() +
                               " is already " + std::string(status_name(v->second.status)));
      }
    }
  }
  return report;
}

void Registry::stage_tool(const ToolDefinition& tool) {
  store(kTools, tool.id, tool.version, canonical_text(tool), EntryStatus::kDraft);
}

void Registry::stage_workflow(const WorkflowDefinition& workflow) {
  store(kWorkflows, workflow.workflow_id, workflow.version, canonical_text(workflow), EntryStatus::kDraft);
}

void Registry::retire_tool(const std::string& id, const SemVer& version) {
  set_status(kTools, id, version, EntryStatus::kRetired);
}

void Registry::retire_workflow(const std::string& id, const SemVer& version) {
  set_status(kWorkflows, id, version, EntryStatus::kRetired);
}

ToolDefinition Registry::resolve_tool(const std::string& id, const std::optional<SemVer>& version) const {
  SemVer v;
  {
    std::shared_lock lock(mu_);
    v = published_record(manifest_.tools, kTools, id, version).version;
  }
  return *load_tool(id, v);
}

WorkflowDefinition Registry::resolve_workflow(const std::string& id, const std::optional<SemVer>& version) const {
  SemVer v;
  {
    std::shared_lock lock(mu_);
    v = published_record(manifest_.workflows, kWorkflows, id, version).version;
  }
  return *load_workflow(id, v);
}

ToolLookup Registry::lookup_tool(const std::string& tool_id) const {
  std::optional<SemVer> published;
  ToolLookup out;
  {
    std::shared_lock lock(mu_);
    auto it = manifest_.tools.find(tool_id);
    if (it == manifest_.tools.end()) return out;
    bool retired = false;
    for (auto v = it->second.rbegin(); v != it->second.rend(); ++v) {
      if (v->second.status == EntryStatus::kPublished) {
        published = v->first;
        break;
      }
      retired = retired || v->second.status == EntryStatus::kRetired;
    }
    if (!published) {
      out.availability = retired ? Availability::kRetired : Availability::kDraftOnly;
      return out;
    }
  }
  out.availability = Availability::kPublished;
  out.tool = load_tool(tool_id, *published);
  return out;
}

std::vector<WorkflowHit> Registry::search_workflows(const std::string& query,
                                                    const std::vector<std::string>& tags) const {
  std::vector<std::pair<std::string, SemVer>> latest;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, versions] : manifest_.workflows) {
      for (auto v = versions.rbegin(); v != versions.rend(); ++v) {
        if (v->second.status == EntryStatus::kPublished) {
          latest.emplace_back(id, v->first);
          break;
        }
      }
    }
  }
  std::set<std::string> wanted_tags;
  for (const auto& t : tags) wanted_tags.insert(lower(t));
  const auto query_tokens = token_set({query});

  std::vector<WorkflowHit> hits;
  for (const auto& [id, version] : latest) {
    const auto wf = load_workflow(id, version);
    std::set<std::string> own_tags;
    for (const auto& t : wf->metadata.tags) own_tags.insert(lower(t));
    if (!std::includes(own_tags.begin(), own_tags.end(), wanted_tags.begin(), wanted_tags.end())) continue;

    const auto name = token_set({wf->name});
    const auto tag_tokens = token_set(wf->metadata.tags);
    auto text = wf->metadata.use_cases;
    text.push_back(wf->description);
    const auto body = token_set(text);
    int score = 0;
    for (const auto& tok : query_tokens) {
      score += 3 * static_cast<int>(name.count(tok)) + 2 * static_cast<int>(tag_tokens.count(tok)) +
               static_cast<int>(body.count(tok));
    }
    if (query_tokens.empty() || score > 0) hits.push_back({id, version, wf->name, score});
  }
  std::sort(hits.begin(), hits.end(), [](const WorkflowHit& a, const WorkflowHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.workflow_id < b.workflow_id;
  });
  return hits;
}

ParameterSchema Registry::get_parameters(const std::string& workflow_id, const std::optional<SemVer>& version) const {
  return resolve_workflow(workflow_id, version).parameters;
}

std::vector<EntryRecord> Registry::list_tools() const {
  std::shared_lock lock(mu_);
  std::vector<EntryRecord> out;
  for (const auto& [id, versions] : manifest_.tools) {
    for (const auto& [v, e] : versions) out.push_back(e);
  }
  return out;
}

std::vector<EntryRecord> Registry::list_workflows() const {
  std::shared_lock lock(mu_);
  std::vector<EntryRecord> out;
  for (const auto& [id, versions] : manifest_.workflows) {
    for (const auto& [v, e] : versions) out.push_back(e);
  }
  return out;
}

std::vector<IntegrityIssue> Registry::integrity_scan() const {
  Manifest snapshot;
  {
    std::shared_lock lock(mu_);
    snapshot = manifest_;
  }
  std::vector<IntegrityIssue> issues;
  auto scan = [&](std::string_view kind, const Section& section) {
    const std::string label = kind == kTools ? "tool" : "workflow";
    for (const auto& [id, versions] : section) {
      for (const auto& [v, e] : versions) {
        std::string text;
        try {
          text = read_document(kind, id, v);
        } catch (const StorageError&) {
          issues.push_back({label, id, v, "document file is missing"});
          continue;
        }
        if (sha256_hex(text) != e.content_hash) {
          issues.push_back({label, id, v, "content hash does not match the manifest"});
          continue;
        }
        std::string canonical;
        if (kind == kTools) {
          auto parsed = parse_tool_definition_text(text);
          if (parsed) canonical = canonical_text(parsed.value());
        } else {
          auto parsed = parse_workflow_definition_text(text);
          if (parsed) canonical = canonical_text(parsed.value());
        }
        if (canonical.empty()) {
          issues.push_back({label, id, v, "stored document no longer parses"});
        } else if (canonical != text) {
          issues.push_back({label, id, v, "stored document is not in canonical form"});
        }
      }
    }
  };
  scan(kTools, snapshot.tools);
  scan(kWorkflows, snapshot.workflows);
  return issues;
}

std::string Registry::fingerprint() const {
  std::shared_lock lock(mu_);
  Json doc = Json::object();
  doc["tools"] = section_document(manifest_.tools);
  doc["workflows"] = section_document(manifest_.workflows);
  return sha256_hex(doc.dump());
}

}  // namespace schemagate
