#pragma once

#include <stdexcept>
#include <string>

namespace infharm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a formula or evaluator.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Closed-form expression evaluated at a pole.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Root bracket does not straddle the target value.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Function expected to be monotone failed a monotonicity probe.
class NonMonotoneError : public Error {
 public:
  using Error::Error;
};

/// Solution parameters violate a case constraint.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Malformed grid or axis description.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// No lattice point of a grid lies inside the solution domain.
class EmptyDomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace infharm
