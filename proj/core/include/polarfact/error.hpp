#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polarfact {

enum class ErrorCode {
  NegativeWeight,
  DuplicateLabel,
  DimensionMismatch,
  UnequalMass,
  UnknownLabel,
  MarginalMismatch,
  NumericalFailure,
  OracleScopeExceeded,
  SplitAtom,
  UnknownHeavyAtom,
  EmptyRestriction,
  NotMeasurePreserving,
  InclusionNotCertified,
  UnknownGalleryName,
  CertificateMissing,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace polarfact
