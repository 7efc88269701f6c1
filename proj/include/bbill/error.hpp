#pragma once

#include <stdexcept>
#include <string>

namespace bbill {

// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the region where a closed form or the billiard map is
// defined (strip violation, negative discriminant, K below sigma_*, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition does not hold (wrong profile class, bad epsilon).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Iterative solver ran out of budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bbill
