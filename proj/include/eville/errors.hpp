#pragma once

#include <stdexcept>
#include <string>

namespace eville {

/// Raised when a caller violates an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bound's applicability condition fails; `code()` names which one
/// ("REQUIRES-LARGER-GAMMA", "REQUIRES-LARGER-K").
class RequiresLargerParameter : public InputError {
 public:
  RequiresLargerParameter(std::string code, const std::string& detail)
      : InputError(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// A schedule cannot be certified (e.g. a member only has a Monte Carlo tail).
class UncertifiableError : public InputError {
 public:
  explicit UncertifiableError(const std::string& what)
      : InputError("UNCERTIFIABLE: " + what) {}
};

/// A Monte Carlo job failed; partial results were discarded.
class JobError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eville
