#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elltail {

enum class ErrorCode {
  InvalidArgument,
  NotSquare,
  NotSymmetric,
  BadDiagonal,
  NotPositiveDefinite,
  IndexOutOfRange,
  DimensionTooLarge,
  NoFeasibleIndexSet,
  NoExactSpec,
  DegenerateH,
  GammaOneRequiresConstantEll,
  DegenerateTies,
  GridRangeExceeded,
  ParseError,
  EmptyColumn,
  InvalidIndices,
  UsageError,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::BadDiagonal: return "BadDiagonal";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::NoFeasibleIndexSet: return "NoFeasibleIndexSet";
    case ErrorCode::NoExactSpec: return "NoExactSpec";
    case ErrorCode::DegenerateH: return "DegenerateH";
    case ErrorCode::GammaOneRequiresConstantEll: return "GammaOneRequiresConstantEll";
    case ErrorCode::DegenerateTies: return "DegenerateTies";
    case ErrorCode::GridRangeExceeded: return "GridRangeExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::InvalidIndices: return "InvalidIndices";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace elltail
