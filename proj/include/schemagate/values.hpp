#pragma once

#include <string>

#include "schemagate/definitions.hpp"
#include "schemagate/diagnostic.hpp"

namespace schemagate {

/// True iff the literal has the JSON shape of `type`.
bool value_conforms(const Json& value, const SemanticType& type);

/// Empty iff `value` type-checks against param.type, lies in
/// allowed_values when present, and satisfies every validation rule.
/// A null value is treated as "not supplied".
Diagnostics validate_value(const Json& value, const ParameterDefinition& param,
                           const std::string& location = {});

/// Rendered type plus rules, used as the `expected` text of prompts.
std::string describe_expectation(const ParameterDefinition& param);

}  // namespace schemagate
