#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "schemagate/documents.hpp"
#include "schemagate/fsutil.hpp"
#include "schemagate/registry.hpp"
#include "schemagate/resolver.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using schemagate::Json;

inline fs::path fixture(const std::string& relative) { return fs::path(SCHEMAGATE_FIXTURES_DIR) / relative; }

inline Json load_json(const std::string& relative) { return Json::parse(schemagate::read_file(fixture(relative))); }

inline schemagate::ToolDefinition load_tool(const std::string& relative) {
  auto parsed = schemagate::parse_tool_definition(load_json(relative));
  if (!parsed) throw std::runtime_error(relative + ": " + schemagate::render_diagnostic(parsed.diagnostics().front()));
  return parsed.value();
}

inline schemagate::WorkflowDefinition load_workflow(const std::string& relative) {
  auto parsed = schemagate::parse_workflow_definition(load_json(relative));
  if (!parsed) throw std::runtime_error(relative + ": " + schemagate::render_diagnostic(parsed.diagnostics().front()));
  return parsed.value();
}

inline const char* const kFixtureTools[] = {"data_loader", "data_cleaner", "data_analyzer",
                                            "materials_property_predictor", "alloy_inverse_designer"};

inline schemagate::StaticToolResolver fixture_resolver() {
  schemagate::StaticToolResolver resolver;
  for (const char* id : kFixtureTools) resolver.add(load_tool(std::string("tools/") + id + ".json"));
  return resolver;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("schemagate-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Registry under `root` holding every fixture tool, both fixture workflows
/// and both fixture datasets.
inline void seed_registry(schemagate::Registry& registry) {
  for (const char* id : kFixtureTools) {
    auto tool = load_tool(std::string("tools/") + id + ".json");
    registry.admit_tool(tool, schemagate::HealthProbe::declared_stub(tool.id));
  }
  for (const char* wf : {"workflows/basic_data_analysis.json", "workflows/alloy_inverse_design.json"}) {
    registry.admit_workflow(load_workflow(wf));
  }
  const auto index = load_json("datasets/datasets.json");
  for (const auto& entry : index) {
    registry.datasets().add(fixture("datasets/" + entry.at("file").get<std::string>()),
                            entry.at("name").get<std::string>(), entry.at("dataset_id").get<std::string>());
  }
}

}  // namespace testsupport
