#ifndef ISCHED_ERROR_HPP_
#define ISCHED_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace isched {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A schedule or instance violates a model constraint. Carries one
/// human-readable line per violated constraint.
class ConstraintError : public Error {
 public:
  ConstraintError(const std::string& what, std::vector<std::string> details)
      : Error(what), details_(std::move(details)) {}

  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// No assignment of start times satisfies a subproblem's windows and
/// precedence relations.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Malformed instance file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace isched

#endif  // ISCHED_ERROR_HPP_
