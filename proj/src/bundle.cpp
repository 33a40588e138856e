#include "schemagate/bundle.hpp"

#include <algorithm>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/fsutil.hpp"

namespace schemagate {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InvalidDocument(path.string() + " is not JSON",
                          {error_at(checks::kSchemaStructure, path.filename().string(), e.what())});
  }
}

}  // namespace

bool BundleReport::ok() const {
  auto admitted = [](const AdmissionReport& r) { return r.admitted; };
  return std::all_of(tools.begin(), tools.end(), admitted) && std::all_of(workflows.begin(), workflows.end(), admitted);
}

BundleReport load_bundle(Registry& registry, const fs::path& dir) {
  BundleReport report;
  for (const auto& path : json_files(dir / "tools")) {
    const auto doc = read_json(path);
    const auto id = doc.value("id", path.stem().string());
    try {
      report.tools.push_back(registry.admit_tool_document(doc, HealthProbe::declared_stub(id)));
    } catch (const DuplicateVersion&) {
      report.skipped.push_back("tool " + id);
    }
  }
  for (const auto& path : json_files(dir / "workflows")) {
    const auto doc = read_json(path);
    auto parsed = parse_workflow_definition(doc);
    if (!parsed) throw InvalidDocument(path.string() + " is not a valid workflow", parsed.diagnostics());
    try {
      report.workflows.push_back(registry.admit_workflow(parsed.value()));
    } catch (const DuplicateVersion&) {
      report.skipped.push_back("workflow " + parsed.value().workflow_id);
    }
  }
  const auto index = dir / "datasets" / "datasets.json";
  if (fs::exists(index)) {
    for (const auto& entry : read_json(index)) {
      const auto file = entry.at("file").get<std::string>();
      std::optional<std::string> id;
      if (entry.contains("dataset_id")) id = entry["dataset_id"].get<std::string>();
      const auto name = entry.value("name", file);
      if (registry.datasets().find(id.value_or(name))) {
        report.skipped.push_back("dataset " + name);
        continue;
      }
      report.datasets.push_back(registry.datasets().add(dir / "datasets" / file, name, id));
    }
  }
  return report;
}

}  // namespace schemagate
