#include "geoflow/errors.hpp"

namespace geoflow {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::PositiveCurvature: return "PositiveCurvature";
    case ErrorCode::IncompleteSpectrum: return "IncompleteSpectrum";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::IntegratorDiverged: return "IntegratorDiverged";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InsufficientSeparation: return "InsufficientSeparation";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NoProbesFound: return "NoProbesFound";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return 2;
    case ErrorCode::PositiveCurvature: return 3;
    case ErrorCode::IncompleteSpectrum: return 4;
    case ErrorCode::NotConverged: return 5;
    case ErrorCode::IntegratorDiverged: return 6;
    case ErrorCode::BudgetExceeded: return 7;
    case ErrorCode::NotHyperbolic: return 8;
    case ErrorCode::NoConvergence: return 9;
    case ErrorCode::InsufficientSeparation: return 10;
    case ErrorCode::EmptyWindow: return 11;
    case ErrorCode::NoProbesFound: return 12;
    case ErrorCode::Unsupported: return 13;
    case ErrorCode::InvalidArgument: return 14;
  }
  return 1;
}

}  // namespace geoflow
