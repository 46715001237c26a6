#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stiffgrad {

enum class ErrorCode {
  PoleEvaluation,
  BranchPoint,
  NotApplicable,
  Divergence,
  NewtonDivergence,
  SingularStepMatrix,
  DegenerateSamples,
  UnknownMethod,
  InvalidArgument,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::BranchPoint: return "BranchPoint";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::SingularStepMatrix: return "SingularStepMatrix";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so callers
/// (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stiffgrad
