#include "schemagate/remote_planner.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"

namespace schemagate {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

std::string system_prompt() {
  Json actions = Json::object();
  for (const auto& [name, schema] : platform_actions()) actions[name] = parameter_schema_document(schema);
  return "You operate a schema-gated workflow platform. Reply with exactly one JSON object of the form "
         "{\"assistant_message\": string, \"proposed_action\": null | {\"action\": string, \"arguments\": object}}. "
         "The only actions are these, with these argument schemas:\n" +
         actions.dump(2) +
         "\nexecute_workflow never runs anything; it prepares an invocation the user must approve.";
}

}  // namespace

RemotePlanner RemotePlanner::from_environment() {
  Config c;
  c.url = env_or("SCHEMAGATE_PLANNER_URL", "https://api.openai.com/v1/chat/completions");
  c.model = env_or("SCHEMAGATE_PLANNER_MODEL", "gpt-4o-mini");
  c.api_key = env_or("SCHEMAGATE_PLANNER_API_KEY", "");
  return RemotePlanner(std::move(c));
}

Json RemotePlanner::request_body(const SessionContext& context) const {
  Json messages = Json::array();
  messages.push_back({{"role", "system"}, {"content", system_prompt()}});
  for (const auto& m : context.messages) {
    // Platform results are fed back as user-visible context.
    const std::string role = m.role == "assistant" ? "assistant" : "user";
    messages.push_back({{"role", role}, {"content", m.role == "system" ? "[platform] " + m.text : m.text}});
  }
  return {{"model", config_.model},
          {"messages", std::move(messages)},
          {"temperature", 0},
          {"response_format", {{"type", "json_object"}}}};
}

PlannerDecision RemotePlanner::decide(const SessionContext& context) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.url, m, url_re)) throw PlannerUnavailable("bad planner URL '" + config_.url + "'");
  const std::string base = m[1];
  const std::string path = m[2].matched ? std::string(m[2]) : "/";
  try {
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path, headers, request_body(context).dump(), "application/json");
    if (!res) throw PlannerUnavailable("planner request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw PlannerUnavailable("planner answered HTTP " + std::to_string(res->status));
    auto body = Json::parse(res->body);
    auto content = body.at("choices").at(0).at("message").at("content").get<std::string>();
    return decision_from_document(Json::parse(content));
  } catch (const PlannerUnavailable&) {
    throw;
  } catch (const std::exception& e) {
    throw PlannerUnavailable(std::string("planner reply unusable: ") + e.what());
  }
}

}  // namespace schemagate
