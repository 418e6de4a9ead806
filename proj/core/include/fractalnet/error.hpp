#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fractalnet {

enum class ErrorCode {
  kSpecError,
  kRegularityViolation,
  kWeightError,
  kMatrixError,
  kSymbolOutOfRange,
  kGenerationError,
  kDepthExceedsTruncation,
  kTruncationBoundary,
  kSingularSystem,
  kFrontierCenter,
  kJunctionInconsistency,
  kLocalizationError,
  kMatricesMissing,
  kNotSeparable,
  kFrontierState,
  kInvalidPath,
  kBadInterval,
  kEmbeddingError,
  kDivisionByZero,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fractalnet
