#ifndef STABREG_ERRORS_HPP
#define STABREG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stabreg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A contract precondition failed (bad input, unverifiable hypothesis).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A configured size/search cap was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class GroupMismatch : public Error {
 public:
  using Error::Error;
};

/// A theorem-check failed. Either a hypothesis (such as the stability
/// parameter) was wrong or a claimed theorem has been refuted.
class TheoremViolation : public Error {
 public:
  using Error::Error;
};

/// Exit codes shared by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitTheoremViolation = 2,
  kExitPrecondition = 3,
  kExitCap = 4,
};

}  // namespace stabreg

#endif  // STABREG_ERRORS_HPP
