#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

// Every failure the library reports carries one of these codes; the CLI maps
// each code to exactly one process exit status (see docs/formats.md).
enum class ErrorCode {
  Schema,
  PositiveCurvature,
  IncompleteSpectrum,
  NotConverged,
  IntegratorDiverged,
  BudgetExceeded,
  NotHyperbolic,
  NoConvergence,
  InsufficientSeparation,
  EmptyWindow,
  NoProbesFound,
  Unsupported,
  InvalidArgument,
};

const char* error_name(ErrorCode code);
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when the two Riccati seeds fail to agree within tolerance.
class NotConvergedError : public Error {
 public:
  NotConvergedError(double spread, const std::string& where)
      : Error(ErrorCode::NotConverged, where + " (seed spread " + std::to_string(spread) + ")"),
        spread_(spread) {}
  double spread() const noexcept { return spread_; }

 private:
  double spread_;
};

}  // namespace geoflow
