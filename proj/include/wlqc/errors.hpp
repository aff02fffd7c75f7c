#pragma once

#include <stdexcept>
#include <string>

namespace wlqc {

enum class ErrorCode {
  DimensionMismatch,
  PenaltyTooSmall,
  SingularMatrix,
  NoConvergence,
  AssumptionViolated,
  SingularA,
  UnstableSubspaceDefect,
  IllConditionedU1,
  InvalidRisk,
  Lambda2Infinite,
  BracketFailure,
  NoFiniteLevel,
  NonFiniteState,
  BadDataFile,
  BadScenario,
};

const char* error_code_name(ErrorCode code);

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what, int stage = -1)
      : std::runtime_error(what), code_(code), stage_(stage) {}

  ErrorCode code() const { return code_; }

  // Stage index for errors raised inside a backward/forward pass, -1 if n/a.
  int stage() const { return stage_; }

 private:
  ErrorCode code_;
  int stage_;
};

}  // namespace wlqc
