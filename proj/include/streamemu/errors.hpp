#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace streamemu {

enum class ErrorCode : std::int32_t {
  InvalidArgument = 1,
  ContractViolation,
  IterationCapExceeded,
  AtomlessDistribution,
  TieDetected,
  InvalidHorizon,
  DuplicateScore,
  InfeasiblePool,
  InvalidRegime,
  InvalidShape,
  IncompletePool,
  TooLargeToEnumerate,
  InsufficientSamples,
  TrialFailure,
  ConfigError,
};

std::string_view errorCodeName(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace streamemu
