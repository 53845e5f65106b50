#pragma once

#include <stdexcept>
#include <string>

namespace homing {

// Numeric values are mirrored by hg_status in homing.h; keep them in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kInvalidAttitude = 4,
  kDegenerateGeometry = 5,
  kNoCollisionSolution = 6,
  kTargetOpening = 7,
  kNumeric = 8,
  kUsage = 9,
  kInternal = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace homing
