#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace autoedit {

/// Broad failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  Io,          // missing file, unreadable directory, write failure
  Validation,  // schema or invariant violation in inputs or parameters
  Config,      // inconsistent or missing configuration
  Llm,         // remote text-generation failure
  Capacity,    // a configured limit was exceeded
  Range,       // index out of range
  Parse,       // unparseable LLM response
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message)
      : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

/// Collects non-fatal warnings raised while running a stage.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

}  // namespace autoedit
