#include "schemagate/diagnostic.hpp"

#include <algorithm>

namespace schemagate {

bool is_registered_check(std::string_view check) {
  return std::find(std::begin(checks::kAll), std::end(checks::kAll), check) != std::end(checks::kAll);
}

Diagnostic error_at(std::string_view check, std::string location, std::string message) {
  return Diagnostic{Severity::kError, std::string(check), std::move(location), std::move(message)};
}

Diagnostic warning_at(std::string_view check, std::string location, std::string message) {
  return Diagnostic{Severity::kWarning, std::string(check), std::move(location), std::move(message)};
}

bool has_errors(const Diagnostics& diagnostics) { return count_errors(diagnostics) > 0; }

std::size_t count_errors(const Diagnostics& diagnostics) {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
    return d.severity == Severity::kError;
  }));
}

std::string_view severity_name(Severity severity) {
  return severity == Severity::kError ? "error" : "warning";
}

std::string render_diagnostic(const Diagnostic& diagnostic) {
  std::string out(severity_name(diagnostic.severity));
  out += "[" + diagnostic.check + "]";
  if (!diagnostic.location.empty()) out += " " + diagnostic.location;
  out += ": " + diagnostic.message;
  return out;
}

}  // namespace schemagate
