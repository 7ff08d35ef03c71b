#pragma once

#include <stdexcept>
#include <string>

namespace dualgraph {

enum class ErrorKind {
  Input,         // bad caller-supplied argument
  NotFound,      // unknown id
  Parse,         // malformed text payload
  Schema,        // structurally valid payload with wrong shape
  Validation,    // references that do not resolve
  Protection,    // attempt to merge a core entity
  Budget,        // over-cap lists
  Domain,        // numeric argument outside the function's domain
  Render,        // unresolved template placeholder
  Precondition,  // missing derived data (e.g. embeddings)
  Provider,      // external provider failure
  ScriptExhausted,
  UnmatchedPrompt,
  Consistency,   // cross-structure invariant violated
};

const char* to_string(ErrorKind kind);

/// Base of every error the library throws. `kind()` is what callers branch on;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failures carry the 1-based line they refer to (0 when not line based).
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, const std::string& message, int line = 0)
      : Error(kind, line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace dualgraph
