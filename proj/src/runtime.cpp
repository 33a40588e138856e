#include "schemagate/runtime.hpp"

namespace schemagate {

Runtime::Runtime(RuntimeConfig config, AdapterRegistry adapters)
    : config_(std::move(config)), registry_(config_.registry_dir), store_(config_.run_dir) {
  std::shared_ptr<Clock> run_clock, gate_clock;
  std::shared_ptr<IdSource> run_ids, gate_ids;
  ExecutorOptions options;
  if (config_.seed) {
    run_clock = std::make_shared<SteppingClock>();
    gate_clock = std::make_shared<SteppingClock>();
    run_ids = std::make_shared<SeededIdSource>(*config_.seed);
    gate_ids = std::make_shared<SeededIdSource>(*config_.seed + 1);
    options.seed = *config_.seed;
  }
  executor_ = std::make_unique<Executor>(store_, registry_, std::move(adapters), &registry_.datasets(), run_clock,
                                         run_ids, options);
  gate_ = std::make_unique<Gate>(registry_, *executor_, gate_clock, gate_ids, config_.gate);
}

}  // namespace schemagate
