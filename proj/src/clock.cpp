#include "schemagate/clock.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>

namespace schemagate {

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
  std::time_t seconds = static_cast<std::time_t>(millis / 1000);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", utc.tm_year + 1900, utc.tm_mon + 1,
                utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec, static_cast<int>(millis % 1000));
  return buf;
}

std::string SystemClock::now() { return format_timestamp(std::chrono::system_clock::now()); }

SteppingClock::SteppingClock(std::chrono::system_clock::time_point start) : current_(start) {}

std::string SteppingClock::now() {
  std::lock_guard lock(mu_);
  auto stamp = format_timestamp(current_);
  current_ += std::chrono::milliseconds(1);
  return stamp;
}

namespace {

std::string uuid_from(std::mt19937_64& rng) {
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // variant 10
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xffff), static_cast<unsigned>(hi & 0xffff),
                static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

}  // namespace

RandomIdSource::RandomIdSource() {
  std::random_device rd;
  std::seed_seq seq{rd(), rd(), rd(), rd()};
  rng_.seed(seq);
}

std::string RandomIdSource::next_uuid() {
  std::lock_guard lock(mu_);
  return uuid_from(rng_);
}

std::string SeededIdSource::next_uuid() {
  std::lock_guard lock(mu_);
  return uuid_from(rng_);
}

bool is_uuid(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool dash = i == 8 || i == 13 || i == 18 || i == 23;
    if (dash ? text[i] != '-' : !std::isxdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  return true;
}

}  // namespace schemagate
