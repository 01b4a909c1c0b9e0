#include "kwtarget/error.hpp"

namespace kwtarget {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kInvalidDof: return "InvalidDof";
    case ErrorCode::kEmptyComplement: return "EmptyComplement";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kNegativeInput: return "NegativeInput";
    case ErrorCode::kDivergentChain: return "DivergentChain";
    case ErrorCode::kEmptyAdGroup: return "EmptyAdGroup";
    case ErrorCode::kMissingPosterior: return "MissingPosterior";
    case ErrorCode::kInsufficientScenarios: return "InsufficientScenarios";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNoFeasibleSolution: return "NoFeasibleSolution";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRange:
    case ErrorCode::kNegativeInput:
    case ErrorCode::kParseError:
    case ErrorCode::kValidationError:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidDof:
    case ErrorCode::kTooLarge:
      return true;
    default:
      return false;
  }
}

ParseError::ParseError(std::size_t line, std::size_t column,
                       const std::string& reason)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + reason),
      line_(line),
      column_(column) {}

}  // namespace kwtarget
