#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "schemagate/executor.hpp"
#include "schemagate/gate.hpp"
#include "schemagate/registry.hpp"

namespace schemagate {

struct RuntimeConfig {
  std::filesystem::path registry_dir = Registry::default_root();
  std::filesystem::path run_dir = RunStore::default_root();
  /// Seeds ids and clocks for reproducible sessions; system sources otherwise.
  std::optional<std::uint64_t> seed;
  GateOptions gate;
};

/// Registry, run store, executor and gate wired together. The gate is the
/// only object holding a path to Executor::execute.
class Runtime {
 public:
  explicit Runtime(RuntimeConfig config, AdapterRegistry adapters = builtin_adapters());

  Registry& registry() noexcept { return registry_; }
  RunStore& store() noexcept { return store_; }
  Gate& gate() noexcept { return *gate_; }
  /// For run queries and waiting; submissions go through gate().dispatch.
  Executor& executor() noexcept { return *executor_; }
  const RuntimeConfig& config() const noexcept { return config_; }

 private:
  RuntimeConfig config_;
  Registry registry_;
  RunStore store_;
  std::unique_ptr<Executor> executor_;
  std::unique_ptr<Gate> gate_;
};

}  // namespace schemagate
