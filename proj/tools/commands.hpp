#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polarfact::cli {

/// Exit statuses. 10 is a mathematical outcome, 2-5 are tool failures.
enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kCertification = 3,
  kInclusionFails = 4,
  kOptimalityFails = 5,
  kInclusionOnly = 10,
};

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace polarfact::cli
