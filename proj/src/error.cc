#include "gradnoise/error.h"

namespace gradnoise {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kEpsOutOfRange: return "EPS_OUT_OF_RANGE";
    case ErrorCode::kKappaOne: return "KAPPA_ONE";
    case ErrorCode::kDegreeZero: return "DEGREE_ZERO";
    case ErrorCode::kExactPathUnsupported: return "EXACT_PATH_UNSUPPORTED";
    case ErrorCode::kEmptyGrid: return "EMPTY_GRID";
    case ErrorCode::kPNotPsd: return "P_NOT_PSD";
    case ErrorCode::kUnstable: return "UNSTABLE";
    case ErrorCode::kNotStable: return "NOT_STABLE";
    case ErrorCode::kDivergent: return "DIVERGENT";
    case ErrorCode::kSingular: return "SINGULAR";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kNumericalFailure: return "NUMERICAL_FAILURE";
    case ErrorCode::kNonFinite: return "NONFINITE";
    case ErrorCode::kNoInteriorCandidate: return "NO_INTERIOR_CANDIDATE";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kInfeasibleCert: return "INFEASIBLE_CERT";
  }
  return "UNKNOWN";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnstable:
    case ErrorCode::kNotStable:
    case ErrorCode::kDivergent:
      return 3;
    case ErrorCode::kSingular:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kNumericalFailure:
    case ErrorCode::kNonFinite:
    case ErrorCode::kNoInteriorCandidate:
    case ErrorCode::kInfeasible:
    case ErrorCode::kInfeasibleCert:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gradnoise
