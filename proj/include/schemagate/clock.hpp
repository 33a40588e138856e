#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace schemagate {

/// Timestamps are ISO-8601 UTC strings with millisecond precision; they
/// order lexicographically.
std::string format_timestamp(std::chrono::system_clock::time_point tp);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::string now() = 0;
};

class SystemClock final : public Clock {
 public:
  std::string now() override;
};

/// Deterministic clock for replay: starts at `start` and advances one
/// millisecond per reading.
class SteppingClock final : public Clock {
 public:
  explicit SteppingClock(std::chrono::system_clock::time_point start =
                             std::chrono::system_clock::time_point{std::chrono::seconds{1767225600}});
  std::string now() override;

 private:
  std::mutex mu_;
  std::chrono::system_clock::time_point current_;
};

class IdSource {
 public:
  virtual ~IdSource() = default;
  /// RFC 4122 version-4 UUID text.
  virtual std::string next_uuid() = 0;
};

class RandomIdSource final : public IdSource {
 public:
  RandomIdSource();
  std::string next_uuid() override;

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

/// Reproducible UUID stream for tests and replays.
class SeededIdSource final : public IdSource {
 public:
  explicit SeededIdSource(std::uint64_t seed) : rng_(seed) {}
  std::string next_uuid() override;

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

bool is_uuid(std::string_view text);

}  // namespace schemagate
