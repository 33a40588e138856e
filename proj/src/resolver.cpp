#include "schemagate/resolver.hpp"

namespace schemagate {

std::string_view availability_name(Availability availability) {
  switch (availability) {
    case Availability::kPublished: return "published";
    case Availability::kDraftOnly: return "draft";
    case Availability::kRetired: return "retired";
    case Availability::kAbsent: return "absent";
  }
  return "absent";
}

void StaticToolResolver::add(ToolDefinition tool) {
  auto id = tool.id;
  tools_[id] = std::make_shared<const ToolDefinition>(std::move(tool));
  status_[id] = Availability::kPublished;
}

void StaticToolResolver::set_status(const std::string& tool_id, Availability availability) {
  status_[tool_id] = availability;
}

void StaticToolResolver::remove(const std::string& tool_id) {
  tools_.erase(tool_id);
  status_.erase(tool_id);
}

ToolLookup StaticToolResolver::lookup_tool(const std::string& tool_id) const {
  auto st = status_.find(tool_id);
  if (st == status_.end()) return {};
  ToolLookup out;
  out.availability = st->second;
  if (st->second == Availability::kPublished) {
    auto it = tools_.find(tool_id);
    if (it == tools_.end()) return {};
    out.tool = it->second;
  }
  return out;
}

}  // namespace schemagate
