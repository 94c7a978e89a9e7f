#pragma once

#include <stdexcept>
#include <string>

namespace gradnoise {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kEpsOutOfRange,
  kKappaOne,
  kDegreeZero,
  kExactPathUnsupported,
  kEmptyGrid,
  kPNotPsd,
  kUnstable,
  kNotStable,
  kDivergent,
  kSingular,
  kNoConvergence,
  kNumericalFailure,
  kNonFinite,
  kNoInteriorCandidate,
  kInfeasible,
  kInfeasibleCert,
};

/// Upper-case identifier for an error code, e.g. "NOT_STABLE".
const char* error_code_name(ErrorCode code);

/// Process exit code for an error: 2 validation, 3 instability, 4 numerical.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace gradnoise
