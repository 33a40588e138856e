#include "schemagate/api.hpp"

#include <chrono>

#include <httplib.h>

#include "schemagate/documents.hpp"
#include "schemagate/error.hpp"
#include "schemagate/remote_planner.hpp"

namespace schemagate {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(render_document(body), kJson);
}

void send_error(httplib::Response& res, const ApiError& error) { send(res, error.status, to_document(error)); }

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw ApiError{400, "BadRequest", std::string("request body is not JSON: ") + e.what(), {}};
  }
}

std::string field_string(const Json& body, const std::string& key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw ApiError{422, "InvalidDocument", "'" + key + "' must be a string",
                   {error_at(checks::kSchemaStructure, key, "expected a string")}};
  }
  return body[key].get<std::string>();
}

std::optional<SemVer> version_param(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto v = SemVer::parse(text);
  if (!v) {
    throw ApiError{422, "InvalidDocument", "'" + text + "' is not a semantic version",
                   {error_at(checks::kVersionFormat, "version", "not a semantic version")}};
  }
  return v;
}

std::string query(const httplib::Request& req, const std::string& key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string{};
}

/// Runs `fn` and converts any failure into an ApiError response.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ApiError& e) {
    send_error(res, e);
  } catch (const std::exception& e) {
    send_error(res, api_error_from(e));
  }
}

std::string httplib_pattern(const std::string& pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      out += ":" + pattern.substr(i + 1, close - i - 1);
      i = close;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

}  // namespace

Json to_document(const ApiError& error) {
  return {{"status", error.status},
          {"code", error.code},
          {"message", error.message},
          {"diagnostics", to_document(error.diagnostics)}};
}

ApiError api_error_from(const std::exception& e) {
  if (const auto* d = dynamic_cast<const DiagnosticError*>(&e)) {
    return {422, d->code(), d->what(), d->diagnostics()};
  }
  if (const auto* u = dynamic_cast<const UnknownParameter*>(&e)) {
    return {422, u->code(), u->what(), {error_at(checks::kUnknownParameter, "parameters", u->what())}};
  }
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    const auto& code = err->code();
    int status = 500;
    if (code == "NotFound" || code == "Retired") status = 404;
    if (code == "NotValidated" || code == "NotApproved" || code == "InvalidState" || code == "DuplicateVersion") {
      status = 409;
    }
    if (code == "ExecutorUnavailable" || code == "PlannerUnavailable") status = 503;
    return {status, code, err->what(), {}};
  }
  if (dynamic_cast<const Json::exception*>(&e)) return {400, "BadRequest", e.what(), {}};
  return {500, "InternalError", e.what(), {}};
}

const std::vector<Route>& api_routes() {
  static const std::vector<Route> routes = {
      {"GET", "/health", "healthcheck"},
      {"POST", "/sessions", "open_session"},
      {"GET", "/sessions/{id}", "session"},
      {"POST", "/sessions/{id}/messages", "step"},
      {"POST", "/sessions/{id}/invocations", "propose_invocation"},
      {"GET", "/sessions/{id}/invocations/{iid}", "inspect_invocation"},
      {"PATCH", "/sessions/{id}/invocations/{iid}", "clarify_or_amend"},
      {"POST", "/sessions/{id}/invocations/{iid}/approve", "approve"},
      {"POST", "/sessions/{id}/invocations/{iid}/dispatch", "dispatch", true},
      {"GET", "/workflows", "search_workflows"},
      {"GET", "/workflows/{id}/parameters", "get_parameters"},
      {"GET", "/datasets", "list_datasets"},
      {"GET", "/runs", "query_runs"},
      {"GET", "/runs/compare", "compare_runs"},
      {"GET", "/runs/{id}", "get_run"},
      {"GET", "/runs/{id}/events", "run_events"},
  };
  return routes;
}

std::shared_ptr<Planner> make_planner(const std::string& spec) {
  if (spec.rfind("scripted:", 0) == 0) {
    return std::make_shared<ScriptedPlanner>(ScriptedPlanner::from_file(spec.substr(9)));
  }
  if (spec == "remote") return std::make_shared<RemotePlanner>(RemotePlanner::from_environment());
  throw InvalidDocument("unknown planner '" + spec + "'",
                        {error_at(checks::kSchemaStructure, "planner", "expected scripted:<file> or remote")});
}

Json to_document(const HealthReport& health) {
  return {{"status", health.status},
          {"registry_entries", health.registry_entries},
          {"datasets", health.datasets},
          {"open_sessions", health.open_sessions},
          {"runs", health.runs}};
}

ApiService::ApiService(Runtime& runtime, std::shared_ptr<Planner> planner)
    : runtime_(runtime), planner_(std::move(planner)), server_(std::make_unique<httplib::Server>()) {
  auto issues = runtime_.registry().integrity_scan();
  if (!issues.empty()) {
    std::string text;
    for (const auto& i : issues) text += "\n  " + i.kind + " " + i.id + " " + i.version.str() + ": " + i.message;
    throw IntegrityError("registry integrity scan failed:" + text);
  }
  install_routes();
}

ApiService::~ApiService() { stop(); }

HealthReport ApiService::health() const {
  HealthReport h;
  h.status = "ok";
  try {
    h.registry_entries = runtime_.registry().list_tools().size() + runtime_.registry().list_workflows().size();
    h.datasets = runtime_.registry().datasets().list().size();
  } catch (const std::exception&) {
    h.status = "degraded";
  }
  h.open_sessions = runtime_.gate().session_count();
  if (runtime_.store().healthy()) {
    h.runs = runtime_.store().count();
  } else {
    h.status = "degraded";
  }
  return h;
}

void ApiService::install_routes() {
  auto& svr = *server_;
  auto& gate = runtime_.gate();
  auto& executor = runtime_.executor();
  std::map<std::string, httplib::Server::Handler> handlers;

  handlers["healthcheck"] = [this](const httplib::Request&, httplib::Response& res) {
    send(res, 200, to_document(health()));
  };
  handlers["open_session"] = [&gate](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send(res, 201, to_document(gate.session(gate.open_session()))); });
  };
  handlers["session"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, to_document(gate.session(req.path_params.at("id")))); });
  };
  handlers["step"] = [this, &gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = parse_body(req);
      auto outcome = gate.step(req.path_params.at("id"), field_string(body, "text"), *planner_);
      send(res, 200, to_document(outcome));
    });
  };
  handlers["propose_invocation"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = parse_body(req);
      auto version = body.contains("version") && body["version"].is_string()
                         ? version_param(body["version"].get<std::string>())
                         : std::nullopt;
      auto proposal = gate.propose(req.path_params.at("id"), field_string(body, "workflow_id"), version,
                                   body.value("parameters", Json::object()));
      send(res, 201, to_document(proposal));
    });
  };
  handlers["inspect_invocation"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, to_document(gate.inspect(req.path_params.at("id"), req.path_params.at("iid")))); });
  };
  handlers["clarify_or_amend"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = parse_body(req);
      const auto params = body.value("parameters", Json::object());
      const auto& sid = req.path_params.at("id");
      const auto& iid = req.path_params.at("iid");
      if (body.value("amend", false)) {
        send(res, 201, to_document(gate.amend(sid, iid, params)));
      } else {
        send(res, 200, to_document(gate.clarify(sid, iid, params)));
      }
    });
  };
  handlers["approve"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, to_document(gate.approve(req.path_params.at("id"), req.path_params.at("iid")))); });
  };
  handlers["dispatch"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto& iid = req.path_params.at("iid");
      auto run_id = gate.dispatch(req.path_params.at("id"), iid);
      send(res, 202, {{"run_id", run_id}, {"invocation_id", iid}});
    });
  };
  handlers["search_workflows"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json args = {{"query", query(req, "q")}};
      if (req.has_param("tags")) {
        Json tags = Json::array();
        std::string all = query(req, "tags");
        for (std::size_t start = 0; start <= all.size();) {
          auto comma = all.find(',', start);
          auto tag = all.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
          if (!tag.empty()) tags.push_back(tag);
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        args["tags"] = tags;
      }
      send(res, 200, gate.execute_read_action("search_workflows", args));
    });
  };
  handlers["get_parameters"] = [&gate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json args = {{"workflow_id", req.path_params.at("id")}};
      if (req.has_param("version")) args["version"] = query(req, "version");
      send(res, 200, gate.execute_read_action("get_parameters", args));
    });
  };
  handlers["list_datasets"] = [&gate](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, gate.execute_read_action("list_datasets", Json::object())); });
  };
  handlers["query_runs"] = [&executor](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      RunFilter filter;
      if (req.has_param("workflow_id")) filter.workflow_id = query(req, "workflow_id");
      if (req.has_param("since")) filter.since = query(req, "since");
      if (req.has_param("status")) {
        filter.status = parse_run_status(query(req, "status"));
        if (!filter.status) {
          throw ApiError{422, "InvalidDocument", "unknown run status",
                         {error_at(checks::kAllowedValues, "status", "expected running, succeeded, failed or aborted")}};
        }
      }
      Json runs = Json::array();
      for (const auto& s : executor.query_runs(filter)) runs.push_back(to_document(s));
      send(res, 200, {{"runs", std::move(runs)}});
    });
  };
  handlers["compare_runs"] = [&executor](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("a") || !req.has_param("b")) {
        throw ApiError{400, "BadRequest", "compare needs query parameters a and b", {}};
      }
      send(res, 200, to_document(executor.compare_runs(query(req, "a"), query(req, "b"))));
    });
  };
  handlers["get_run"] = [&executor](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, to_document(executor.get_run(req.path_params.at("id")))); });
  };
  handlers["run_events"] = [&executor](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run_id = req.path_params.at("id");
      executor.get_run(run_id);  // 404 before the stream starts
      auto cursor = std::make_shared<std::size_t>(0);
      if (req.has_param("from")) *cursor = std::stoul(query(req, "from"));
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [&executor, run_id, cursor](std::size_t, httplib::DataSink& sink) {
            auto events = executor.wait_events(run_id, *cursor, std::chrono::milliseconds(500));
            for (const auto& e : events) {
              const auto frame = "id: " + std::to_string(*cursor) + "\nevent: " + e.event +
                                 "\ndata: " + to_document(e).dump() + "\n\n";
              if (!sink.write(frame.data(), frame.size())) return false;
              ++*cursor;
              if (e.event == "run_finished") {
                sink.done();
                return true;
              }
            }
            if (events.empty() && is_terminal(executor.get_run(run_id).status)) sink.done();
            return true;
          });
    });
  };

  for (const auto& route : api_routes()) {
    const auto pattern = httplib_pattern(route.pattern);
    const auto& handler = handlers.at(route.operation);
    if (route.method == "GET") {
      svr.Get(pattern, handler);
    } else if (route.method == "POST") {
      svr.Post(pattern, handler);
    } else if (route.method == "PATCH") {
      svr.Patch(pattern, handler);
    }
  }
  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send_error(res, {404, "NotFound", "no route for " + req.method + " " + req.path, {}});
    }
  });
}

int ApiService::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw StorageError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

bool ApiService::listen(const std::string& host, int port) { return server_->listen(host, port); }

void ApiService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace schemagate
