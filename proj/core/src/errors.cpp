#include "lsslab/errors.hpp"

namespace lsslab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDomainError: return "DomainError";
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kBranchViolation: return "BranchViolation";
    case ErrorKind::kPoleAtAtom: return "PoleAtAtom";
    case ErrorKind::kOutsideSupport: return "OutsideSupport";
    case ErrorKind::kLogDomain: return "LogDomain";
    case ErrorKind::kNodeSingularity: return "NodeSingularity";
    case ErrorKind::kQuadratureStall: return "QuadratureStall";
    case ErrorKind::kImaginaryResidue: return "ImaginaryResidue";
    case ErrorKind::kDenominatorNearZero: return "DenominatorNearZero";
    case ErrorKind::kKernelOutOfDisk: return "KernelOutOfDisk";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kDegenerateTruncation: return "DegenerateTruncation";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptySample: return "EmptySample";
    case ErrorKind::kTooFewPoints: return "TooFewPoints";
    case ErrorKind::kNonPositiveKs: return "NonPositiveKs";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kCostBudgetExceeded: return "CostBudgetExceeded";
    case ErrorKind::kUnknownKey: return "UnknownKey";
    case ErrorKind::kTypeMismatch: return "TypeMismatch";
    case ErrorKind::kMissingRequired: return "MissingRequired";
    case ErrorKind::kConstraintViolation: return "ConstraintViolation";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lsslab
