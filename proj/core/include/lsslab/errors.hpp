#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsslab {

enum class ErrorKind {
  kInvalidArgument,
  kDomainError,
  kNonConvergence,
  kBranchViolation,
  kPoleAtAtom,
  kOutsideSupport,
  kLogDomain,
  kNodeSingularity,
  kQuadratureStall,
  kImaginaryResidue,
  kDenominatorNearZero,
  kKernelOutOfDisk,
  kZeroVariance,
  kDegenerateTruncation,
  kDimensionMismatch,
  kEmptySample,
  kTooFewPoints,
  kNonPositiveKs,
  kOutOfRange,
  kCostBudgetExceeded,
  kUnknownKey,
  kTypeMismatch,
  kMissingRequired,
  kConstraintViolation,
  kIoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `kind()` is stable and is what tests
/// and the CLI dispatch on; the message carries context for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace lsslab
