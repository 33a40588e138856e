#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "schemagate/gate.hpp"
#include "schemagate/runtime.hpp"

namespace httplib {
class Server;
}

namespace schemagate {

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;
  Diagnostics diagnostics;
};

Json to_document(const ApiError& error);
/// Maps engine exceptions: diagnostics and unknown parameters 422, NotFound
/// and Retired 404, gate state 409, unavailable services 503.
ApiError api_error_from(const std::exception& e);

struct Route {
  std::string method;
  std::string pattern;  // path template, {name} segments
  std::string operation;
  /// True only for the route that hands work to the executor.
  bool submits_work = false;
};

/// Every route the service exposes, in matching order.
const std::vector<Route>& api_routes();

/// Selects a planner from "scripted:<file>" or "remote".
std::shared_ptr<Planner> make_planner(const std::string& spec);

struct HealthReport {
  std::string status;  // ok | degraded
  std::size_t registry_entries = 0;
  std::size_t datasets = 0;
  std::size_t open_sessions = 0;
  std::size_t runs = 0;
};

Json to_document(const HealthReport& health);

/// HTTP/JSON boundary over a Runtime. Bodies are the canonical documents.
class ApiService {
 public:
  /// Refuses to start (IntegrityError) when the registry fails its integrity scan.
  ApiService(Runtime& runtime, std::shared_ptr<Planner> planner);
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  HealthReport health() const;

  /// Binds and serves on a background thread; returns the bound port
  /// (`port` 0 picks a free one). Throws StorageError if binding fails.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Runtime& runtime_;
  std::shared_ptr<Planner> planner_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace schemagate
