#include "polarfact/error.hpp"

namespace polarfact {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnequalMass: return "UnequalMass";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::OracleScopeExceeded: return "OracleScopeExceeded";
    case ErrorCode::SplitAtom: return "SplitAtom";
    case ErrorCode::UnknownHeavyAtom: return "UnknownHeavyAtom";
    case ErrorCode::EmptyRestriction: return "EmptyRestriction";
    case ErrorCode::NotMeasurePreserving: return "NotMeasurePreserving";
    case ErrorCode::InclusionNotCertified: return "InclusionNotCertified";
    case ErrorCode::UnknownGalleryName: return "UnknownGalleryName";
    case ErrorCode::CertificateMissing: return "CertificateMissing";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace polarfact
