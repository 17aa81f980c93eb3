#include "svarkit/errors.hpp"

namespace svarkit {

const char* kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::SingularRegressors: return "SingularRegressors";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NearUnitRoot: return "NearUnitRoot";
    case ErrorKind::WeakInstrument: return "WeakInstrument";
    case ErrorKind::NegativeDf: return "NegativeDf";
    case ErrorKind::InfeasibleRestrictions: return "InfeasibleRestrictions";
    case ErrorKind::TooManyRestrictions: return "TooManyRestrictions";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::SingularImpact: return "SingularImpact";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NonInvertibleLoading: return "NonInvertibleLoading";
    case ErrorKind::DegenerateSubset: return "DegenerateSubset";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::UnstableDgp: return "UnstableDgp";
    case ErrorKind::ReplicateFailure: return "ReplicateFailure";
  }
  return "Unknown";
}

}  // namespace svarkit
