#pragma once

#include <stdexcept>
#include <string>

namespace stablewalk {

// Coarse classification used by callers (e.g. the CLI) to pick exit codes:
// invalid user input vs. a numerical/Monte Carlo computation that failed.
enum class ErrorClass { validation, compute };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}
  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define STABLEWALK_DEFINE_ERROR(NAME, CLASS)                       \
  class NAME : public Error {                                      \
   public:                                                         \
    explicit NAME(const std::string& what)                         \
        : Error(ErrorClass::CLASS, #NAME, what) {}                 \
  }

// Parameter/domain validation failures (caller supplied bad input).
STABLEWALK_DEFINE_ERROR(OutOfSetA, validation);
STABLEWALK_DEFINE_ERROR(DomainError, validation);
STABLEWALK_DEFINE_ERROR(WindowOutOfRange, validation);
STABLEWALK_DEFINE_ERROR(RegimeViolation, validation);
STABLEWALK_DEFINE_ERROR(GridMismatch, validation);
STABLEWALK_DEFINE_ERROR(SerializationError, validation);

// Numerical / Monte Carlo failures (input was valid, computation could not
// deliver the requested quality).
STABLEWALK_DEFINE_ERROR(QuadratureFailure, compute);
STABLEWALK_DEFINE_ERROR(EmptySample, compute);
STABLEWALK_DEFINE_ERROR(DegenerateWeights, compute);
STABLEWALK_DEFINE_ERROR(TruncationTooSevere, compute);
STABLEWALK_DEFINE_ERROR(EpochBudgetExceeded, compute);
STABLEWALK_DEFINE_ERROR(InconsistentEstimates, compute);

#undef STABLEWALK_DEFINE_ERROR

}  // namespace stablewalk
