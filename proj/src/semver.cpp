#include "schemagate/semver.hpp"

#include <charconv>

namespace schemagate {

namespace {

std::optional<std::uint64_t> parse_component(std::string_view part) {
  if (part.empty() || part.size() > 19) return std::nullopt;
  if (part.size() > 1 && part.front() == '0') return std::nullopt;
  for (char c : part) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
  if (ec != std::errc{} || ptr != part.data() + part.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<SemVer> SemVer::parse(std::string_view text) {
  std::uint64_t parts[3];
  for (int i = 0; i < 3; ++i) {
    const auto dot = text.find('.');
    const bool last = i == 2;
    if (last != (dot == std::string_view::npos)) return std::nullopt;
    auto component = parse_component(last ? text : text.substr(0, dot));
    if (!component) return std::nullopt;
    parts[i] = *component;
    if (!last) text.remove_prefix(dot + 1);
  }
  return SemVer{parts[0], parts[1], parts[2]};
}

std::string SemVer::str() const {
  return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

}  // namespace schemagate
