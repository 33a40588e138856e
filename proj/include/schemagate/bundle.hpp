#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "schemagate/registry.hpp"

namespace schemagate {

/// Outcome of loading a document directory into a registry.
struct BundleReport {
  std::vector<AdmissionReport> tools;
  std::vector<AdmissionReport> workflows;
  std::vector<DatasetDescriptor> datasets;
  /// Entries already published with the same id and version.
  std::vector<std::string> skipped;

  bool ok() const;
};

/// Admits `<dir>/tools/*.json` (declared-stub probes), then
/// `<dir>/workflows/*.json`, then registers the CSVs listed in
/// `<dir>/datasets/datasets.json` ({dataset_id?, name?, file}). Files are
/// taken in name order.
BundleReport load_bundle(Registry& registry, const std::filesystem::path& dir);

}  // namespace schemagate
