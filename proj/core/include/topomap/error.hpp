#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topomap {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorCategory {
  kIo,        // unreadable / unwritable file
  kParse,     // syntactically malformed input
  kFormat,    // well-formed input violating a file-format or domain invariant
  kConfig,    // inconsistent configuration or flags
  kPipeline,  // failure while mapping or evaluating valid inputs
};

const char* to_string(ErrorCategory category);

// Exit code contract: 0 success, 1 pipeline error, 2 I/O or config error.
int exit_code_for(ErrorCategory category);

/// Structured error thrown by every loader and pipeline stage.
///
/// `code()` is a stable dotted identifier (e.g. "descriptors.truncated")
/// that tests and callers can match on; `what()` is the human-readable
/// diagnostic including the offending path, line, id or byte offset.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return exit_code_for(category_); }

 private:
  ErrorCategory category_;
  std::string code_;
};

[[noreturn]] void fail(ErrorCategory category, std::string code, const std::string& message);

}  // namespace topomap
