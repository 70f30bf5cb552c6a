#ifndef CCFLOW_ERROR_HPP
#define CCFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ccflow {

enum class ErrorCode {
  NonManifold,
  Disconnected,
  NonOrientable,
  DegenerateFlip,
  InvalidU,
  InvalidR,
  DegenerateLength,
  DegenerateTriangle,
  FoldedQuad,
  PreconditionViolated,
  NotPSD,
  DimensionMismatch,
  InvalidTarget,
  StepFailure,
  FlipLimitExceeded,
  ParseError,
  QuadratureFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

} // namespace ccflow

#endif
