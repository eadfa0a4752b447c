#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace correctspeech {

// Input errors are problems with what the caller handed us (bad files,
// schema violations, unknown words). Processing errors happen while doing
// the actual work on otherwise valid inputs.
enum class ErrorCategory { kInput, kProcessing };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message,
        ErrorCategory category = ErrorCategory::kInput)
      : std::runtime_error(message),
        kind_(std::move(kind)),
        category_(category) {}

  // Stable machine-readable name, e.g. "SizeMismatch".
  const std::string& kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

inline Error input_error(std::string kind, const std::string& message) {
  return Error(std::move(kind), message, ErrorCategory::kInput);
}

inline Error processing_error(std::string kind, const std::string& message) {
  return Error(std::move(kind), message, ErrorCategory::kProcessing);
}

}  // namespace correctspeech
