#pragma once

#include <stdexcept>
#include <string>

namespace flatplan {

enum class ErrorCode {
  kNonPositiveDuration,
  kIllConditioned,
  kEmptyBracket,
  kNoFiniteCost,
  kNonPositiveStep,
  kRopeInverted,
  kRopeSlack,
  kUnactuatedResidual,
  kSingularMass,
  kDegenerateWorkspace,
  kOutOfWorkspace,
  kNoFreeSpace,
  kInfeasibleEndpoints,
  kNoSolution,
  kIncompatibleTrees,
  kIncompatibleDump,
  kParseError,
};

class PlanningError : public std::runtime_error {
 public:
  PlanningError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw PlanningError(code, what);
}

}  // namespace flatplan
