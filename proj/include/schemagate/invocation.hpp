#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schemagate/document.hpp"
#include "schemagate/semver.hpp"

namespace schemagate {

enum class InvocationState { kDraft, kValidated, kApproved, kDispatched };

std::string_view state_name(InvocationState state);
std::optional<InvocationState> parse_state(std::string_view text);

/// What to run: a published workflow version plus workflow-level parameters.
/// `history` records every state the object has been in, oldest first.
struct InvocationObject {
  std::string invocation_id;
  std::string workflow_id;
  SemVer version;
  Json parameters = Json::object();
  InvocationState state = InvocationState::kDraft;
  std::string created_at;
  std::optional<std::string> parent_invocation;
  std::vector<InvocationState> history{InvocationState::kDraft};

  /// Moves one step along draft -> validated -> approved -> dispatched.
  /// Throws InvalidState for any other transition.
  void advance(InvocationState next);
  /// Back to draft; used whenever a parameter changes.
  void reset();

  bool operator==(const InvocationObject&) const = default;
};

Json to_document(const InvocationObject& invocation);
InvocationObject invocation_from_document(const Json& document);

}  // namespace schemagate
