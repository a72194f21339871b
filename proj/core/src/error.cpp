#include "topomap/error.hpp"

#include <utility>

namespace topomap {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kIo:
      return "io";
    case ErrorCategory::kParse:
      return "parse";
    case ErrorCategory::kFormat:
      return "format";
    case ErrorCategory::kConfig:
      return "config";
    case ErrorCategory::kPipeline:
      return "pipeline";
  }
  return "unknown";
}

int exit_code_for(ErrorCategory category) {
  return category == ErrorCategory::kPipeline ? 1 : 2;
}

Error::Error(ErrorCategory category, std::string code, const std::string& message)
    : std::runtime_error(message), category_(category), code_(std::move(code)) {}

void fail(ErrorCategory category, std::string code, const std::string& message) {
  throw Error(category, std::move(code), message);
}

}  // namespace topomap
