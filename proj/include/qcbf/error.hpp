#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcbf {

enum class ErrorCode {
  kDimensionMismatch,
  kSpecInvalid,
  kRankConditionViolated,
  kDegreeOverflow,
  kNotPsd,
  kEmptyVertexList,
  kBudgetExhausted,
  kInfeasible,
  kNumericalFailure,
  kIllConditioned,
  kOrientationUnsupported,
  kParse,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kRankConditionViolated: return "RankConditionViolated";
    case ErrorCode::kDegreeOverflow: return "DegreeOverflow";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kEmptyVertexList: return "EmptyVertexList";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kOrientationUnsupported: return "OrientationUnsupported";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

/// Exception type thrown by every fallible operation in the library. The
/// code is the stable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qcbf
