#include "schemagate/invocation.hpp"

#include "schemagate/error.hpp"

namespace schemagate {

namespace {
constexpr std::string_view kStateNames[] = {"draft", "validated", "approved", "dispatched"};
}

std::string_view state_name(InvocationState state) { return kStateNames[static_cast<int>(state)]; }

std::optional<InvocationState> parse_state(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (kStateNames[i] == text) return static_cast<InvocationState>(i);
  }
  return std::nullopt;
}

void InvocationObject::advance(InvocationState next) {
  if (static_cast<int>(next) != static_cast<int>(state) + 1) {
    throw InvalidState("invocation " + invocation_id + " cannot move from " + std::string(state_name(state)) +
                       " to " + std::string(state_name(next)));
  }
  state = next;
  history.push_back(next);
}

void InvocationObject::reset() {
  if (state == InvocationState::kDispatched) {
    throw InvalidState("invocation " + invocation_id + " was dispatched and is immutable");
  }
  if (state == InvocationState::kDraft) return;
  state = InvocationState::kDraft;
  history.push_back(state);
}

Json to_document(const InvocationObject& invocation) {
  Json doc = Json::object();
  doc["invocation_id"] = invocation.invocation_id;
  doc["workflow_id"] = invocation.workflow_id;
  doc["version"] = invocation.version.str();
  doc["parameters"] = invocation.parameters;
  doc["state"] = state_name(invocation.state);
  doc["created_at"] = invocation.created_at;
  doc["parent_invocation"] = invocation.parent_invocation ? Json(*invocation.parent_invocation) : Json(nullptr);
  Json history = Json::array();
  for (auto s : invocation.history) history.push_back(state_name(s));
  doc["state_history"] = std::move(history);
  return doc;
}

InvocationObject invocation_from_document(const Json& document) {
  InvocationObject out;
  try {
    out.invocation_id = document.at("invocation_id").get<std::string>();
    out.workflow_id = document.at("workflow_id").get<std::string>();
    auto version = SemVer::parse(document.at("version").get<std::string>());
    if (!version) throw StorageError("bad invocation version");
    out.version = *version;
    out.parameters = document.at("parameters");
    auto state = parse_state(document.at("state").get<std::string>());
    if (!state) throw StorageError("bad invocation state");
    out.state = *state;
    out.created_at = document.value("created_at", "");
    if (document.contains("parent_invocation") && document["parent_invocation"].is_string()) {
      out.parent_invocation = document["parent_invocation"].get<std::string>();
    }
    out.history.clear();
    for (const auto& s : document.value("state_history", Json::array())) {
      if (auto parsed = parse_state(s.get<std::string>())) out.history.push_back(*parsed);
    }
    if (out.history.empty()) out.history.push_back(out.state);
  } catch (const Json::exception& e) {
    throw StorageError(std::string("malformed invocation document: ") + e.what());
  }
  return out;
}

}  // namespace schemagate
