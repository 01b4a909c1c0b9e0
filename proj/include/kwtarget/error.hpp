#pragma once

#include <stdexcept>
#include <string>

namespace kwtarget {

enum class ErrorCode {
  kNotPositiveDefinite,
  kInvalidDof,
  kEmptyComplement,
  kOutOfRange,
  kNegativeInput,
  kDivergentChain,
  kEmptyAdGroup,
  kMissingPosterior,
  kInsufficientScenarios,
  kInfeasible,
  kNoFeasibleSolution,
  kTooLarge,
  kParseError,
  kValidationError,
  kEmptyDataset,
  kInvalidArgument,
  kIo,
};

const char* error_code_name(ErrorCode code);

// True for errors caused by bad user input (CLI exit code 2); everything else
// is a runtime failure (exit code 3).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Malformed dataset cell. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace kwtarget
