#include "wlqc/errors.hpp"

namespace wlqc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PenaltyTooSmall: return "PenaltyTooSmall";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::SingularA: return "SingularA";
    case ErrorCode::UnstableSubspaceDefect: return "UnstableSubspaceDefect";
    case ErrorCode::IllConditionedU1: return "IllConditionedU1";
    case ErrorCode::InvalidRisk: return "InvalidRisk";
    case ErrorCode::Lambda2Infinite: return "Lambda2Infinite";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::NoFiniteLevel: return "NoFiniteLevel";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::BadDataFile: return "BadDataFile";
    case ErrorCode::BadScenario: return "BadScenario";
  }
  return "UnknownError";
}

}  // namespace wlqc
