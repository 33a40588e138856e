#pragma once

#include <string>

#include <json.hpp>

namespace schemagate {

// Documents keep key order: canonical renderings and parameter declaration
// order both depend on it.
using Json = nlohmann::ordered_json;

/// Two-space indented rendering with a trailing LF.
std::string render_document(const Json& doc);

}  // namespace schemagate
