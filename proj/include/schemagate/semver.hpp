#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace schemagate {

/// major.minor.patch, each a non-negative integer without leading zeros.
struct SemVer {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;

  static std::optional<SemVer> parse(std::string_view text);

  std::string str() const;

  auto operator<=>(const SemVer&) const = default;
  bool operator==(const SemVer&) const = default;
};

}  // namespace schemagate
