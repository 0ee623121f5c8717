#pragma once

#include <stdexcept>
#include <string>

namespace hf {

enum class ErrorCode {
  DegenerateSubset,
  NonFinite,
  DomainError,
  InsufficientData,
  NotEnoughInliers,
  DiscardTooSmall,
  InvalidScale,
  InvalidArgument,
  EmptyGraph,
  ZeroDegreeVertex,
  ConvergenceFailure,
  EmptySubHypergraph,
  NoStructuresFound,
  InvalidSpec,
  LengthMismatch,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateSubset: return "DegenerateSubset";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotEnoughInliers: return "NotEnoughInliers";
    case ErrorCode::DiscardTooSmall: return "DiscardTooSmall";
    case ErrorCode::InvalidScale: return "InvalidScale";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::ZeroDegreeVertex: return "ZeroDegreeVertex";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::EmptySubHypergraph: return "EmptySubHypergraph";
    case ErrorCode::NoStructuresFound: return "NoStructuresFound";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hf
