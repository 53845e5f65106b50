#include "homing/common/error.hpp"

namespace homing {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "configuration";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInvalidAttitude: return "invalid-attitude";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kNoCollisionSolution: return "no-collision-solution";
    case ErrorCode::kTargetOpening: return "target-opening";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace homing
