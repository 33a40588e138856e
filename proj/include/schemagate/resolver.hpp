#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "schemagate/definitions.hpp"

namespace schemagate {

enum class Availability { kPublished, kDraftOnly, kRetired, kAbsent };

std::string_view availability_name(Availability availability);

struct ToolLookup {
  Availability availability = Availability::kAbsent;
  /// Highest published version; set iff availability is kPublished.
  std::shared_ptr<const ToolDefinition> tool;
};

/// Read-only view of tool status used by workflow validation and the gate.
class ToolResolver {
 public:
  virtual ~ToolResolver() = default;
  virtual ToolLookup lookup_tool(const std::string& tool_id) const = 0;
};

/// Map-backed resolver for tests and pure validation runs. Tools added
/// with `add` are published; `set_status` overrides availability.
class StaticToolResolver final : public ToolResolver {
 public:
  StaticToolResolver() = default;
  void add(ToolDefinition tool);
  void set_status(const std::string& tool_id, Availability availability);
  void remove(const std::string& tool_id);
  ToolLookup lookup_tool(const std::string& tool_id) const override;

 private:
  std::map<std::string, std::shared_ptr<const ToolDefinition>> tools_;
  std::map<std::string, Availability> status_;
};

}  // namespace schemagate
