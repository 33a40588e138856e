#pragma once

#include <string>

#include "schemagate/gate.hpp"

namespace schemagate {

/// Planner backed by an OpenAI-compatible chat-completion endpoint. The
/// model must answer with a PlannerDecision document; anything else, and
/// every transport failure, raises PlannerUnavailable.
class RemotePlanner final : public Planner {
 public:
  struct Config {
    /// Full URL of the chat-completions endpoint.
    std::string url;
    std::string model;
    std::string api_key;
    int timeout_seconds = 60;
  };

  explicit RemotePlanner(Config config) : config_(std::move(config)) {}
  /// SCHEMAGATE_PLANNER_URL, SCHEMAGATE_PLANNER_MODEL, SCHEMAGATE_PLANNER_API_KEY.
  static RemotePlanner from_environment();

  PlannerDecision decide(const SessionContext& context) override;

  /// The request body sent for `context`.
  Json request_body(const SessionContext& context) const;

 private:
  Config config_;
};

}  // namespace schemagate
