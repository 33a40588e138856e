#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace schemagate {

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string check;
  std::string location;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

/// Identifiers of every check that may appear in a Diagnostic.
namespace checks {
inline constexpr std::string_view kSchemaStructure = "schema_structure";
inline constexpr std::string_view kTypeSyntax = "type_syntax";
inline constexpr std::string_view kVersionFormat = "version_format";
inline constexpr std::string_view kIdentifierFormat = "identifier_format";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kSelfReference = "self_reference";
inline constexpr std::string_view kNonemptySteps = "nonempty_steps";
inline constexpr std::string_view kDanglingReference = "dangling_reference";
// admission
inline constexpr std::string_view kParameterConsistency = "parameter_consistency";
inline constexpr std::string_view kDocumentationCompleteness = "documentation_completeness";
inline constexpr std::string_view kServiceAvailability = "service_availability";
// workflow validation
inline constexpr std::string_view kAcyclicity = "acyclicity";
inline constexpr std::string_view kEdgeTypeCompatibility = "edge_type_compatibility";
inline constexpr std::string_view kParameterResolution = "parameter_resolution";
inline constexpr std::string_view kToolAvailability = "tool_availability";
inline constexpr std::string_view kMappingConsistency = "mapping_consistency";
// value level
inline constexpr std::string_view kRequired = "required";
inline constexpr std::string_view kTypeMismatch = "type_mismatch";
inline constexpr std::string_view kAllowedValues = "allowed_values";
inline constexpr std::string_view kNotEmpty = "not_empty";
inline constexpr std::string_view kMin = "min";
inline constexpr std::string_view kMax = "max";
inline constexpr std::string_view kUnknownParameter = "unknown_parameter";

inline constexpr std::string_view kAll[] = {
    kSchemaStructure,   kTypeSyntax,          kVersionFormat,
    kIdentifierFormat,  kDuplicateId,         kSelfReference,
    kNonemptySteps,     kDanglingReference,   kParameterConsistency,
    kDocumentationCompleteness,               kServiceAvailability,
    kAcyclicity,        kEdgeTypeCompatibility, kParameterResolution,
    kToolAvailability,  kMappingConsistency,  kRequired,
    kTypeMismatch,      kAllowedValues,       kNotEmpty,
    kMin,               kMax,                 kUnknownParameter,
};
}  // namespace checks

bool is_registered_check(std::string_view check);

Diagnostic error_at(std::string_view check, std::string location, std::string message);
Diagnostic warning_at(std::string_view check, std::string location, std::string message);

bool has_errors(const Diagnostics& diagnostics);
std::size_t count_errors(const Diagnostics& diagnostics);

std::string_view severity_name(Severity severity);
std::string render_diagnostic(const Diagnostic& diagnostic);

}  // namespace schemagate
