#pragma once

#include <stdexcept>
#include <string>

namespace thetadim {

// Error categories. The numeric values are part of the C API (td_status).
enum class ErrorCode : int {
  kOk = 0,
  kEmptySet = 1,
  kDomain = 2,
  kRange = 3,
  kResolution = 4,
  kConfig = 5,
  kOverLimit = 6,
  kNonBracketed = 7,
  kDegenerateScale = 8,
  kNotImplemented = 9,
  kZeroEnergy = 10,
  kIo = 11,
  kPrecondition = 12,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define THETADIM_DEFINE_ERROR(Name, Code)                            \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Code, what) {}    \
  };

THETADIM_DEFINE_ERROR(EmptySetError, ErrorCode::kEmptySet)
THETADIM_DEFINE_ERROR(DomainError, ErrorCode::kDomain)
THETADIM_DEFINE_ERROR(RangeError, ErrorCode::kRange)
THETADIM_DEFINE_ERROR(ConfigError, ErrorCode::kConfig)
THETADIM_DEFINE_ERROR(OverLimitError, ErrorCode::kOverLimit)
THETADIM_DEFINE_ERROR(NonBracketedError, ErrorCode::kNonBracketed)
THETADIM_DEFINE_ERROR(DegenerateScaleError, ErrorCode::kDegenerateScale)
THETADIM_DEFINE_ERROR(NotImplementedError, ErrorCode::kNotImplemented)
THETADIM_DEFINE_ERROR(ZeroEnergyError, ErrorCode::kZeroEnergy)
THETADIM_DEFINE_ERROR(IoError, ErrorCode::kIo)
THETADIM_DEFINE_ERROR(PreconditionError, ErrorCode::kPrecondition)

#undef THETADIM_DEFINE_ERROR

// Raised when a requested scale is finer than the set's resolution. Carries
// the smallest coarse scale the query machinery can still honor.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, double min_admissible_delta)
      : Error(ErrorCode::kResolution, what),
        min_admissible_delta_(min_admissible_delta) {}
  double min_admissible_delta() const noexcept { return min_admissible_delta_; }

 private:
  double min_admissible_delta_;
};

}  // namespace thetadim
