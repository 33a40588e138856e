#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "schemagate/diagnostic.hpp"

namespace schemagate {

/// Base of every error the engine raises. `code()` is the stable identifier
/// surfaced over the wire and by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SCHEMAGATE_DEFINE_ERROR(Name)                          \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& message)                  \
        : Error(#Name, message) {}                             \
  }

SCHEMAGATE_DEFINE_ERROR(NotFound);
SCHEMAGATE_DEFINE_ERROR(Retired);
SCHEMAGATE_DEFINE_ERROR(DuplicateVersion);
SCHEMAGATE_DEFINE_ERROR(StorageError);
SCHEMAGATE_DEFINE_ERROR(NotValidated);
SCHEMAGATE_DEFINE_ERROR(NotApproved);
SCHEMAGATE_DEFINE_ERROR(InvalidState);
SCHEMAGATE_DEFINE_ERROR(UnknownParameter);
SCHEMAGATE_DEFINE_ERROR(ExecutorUnavailable);
SCHEMAGATE_DEFINE_ERROR(PlannerUnavailable);
SCHEMAGATE_DEFINE_ERROR(AdapterMissing);
SCHEMAGATE_DEFINE_ERROR(CyclicDependencies);
SCHEMAGATE_DEFINE_ERROR(IntegrityError);

#undef SCHEMAGATE_DEFINE_ERROR

/// Raised by parse_semantic_type; carries the offending token and its offset.
class TypeSyntaxError : public Error {
 public:
  TypeSyntaxError(std::string token, std::size_t position, const std::string& message)
      : Error("SyntaxError", message), token_(std::move(token)), position_(position) {}

  const std::string& token() const noexcept { return token_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string token_;
  std::size_t position_;
};

/// Errors that carry a full diagnostic list (document rejected, arguments
/// malformed, registry drift detected at dispatch).
class DiagnosticError : public Error {
 public:
  DiagnosticError(std::string code, const std::string& message,
                  std::vector<Diagnostic> diagnostics)
      : Error(std::move(code), message), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

class InvalidDocument : public DiagnosticError {
 public:
  InvalidDocument(const std::string& message, std::vector<Diagnostic> diagnostics)
      : DiagnosticError("InvalidDocument", message, std::move(diagnostics)) {}
};

class ActionArgumentError : public DiagnosticError {
 public:
  ActionArgumentError(const std::string& message, std::vector<Diagnostic> diagnostics)
      : DiagnosticError("ActionArgumentError", message, std::move(diagnostics)) {}
};

class GateRegression : public DiagnosticError {
 public:
  GateRegression(const std::string& message, std::vector<Diagnostic> diagnostics)
      : DiagnosticError("GateRegression", message, std::move(diagnostics)) {}
};

}  // namespace schemagate
