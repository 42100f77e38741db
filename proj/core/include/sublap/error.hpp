#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sublap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad sizes, out-of-range parameters, schema violations.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed or produced an inadmissible value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public InputError {
 public:
  using InputError::InputError;
};

class SizeMismatch : public InputError {
 public:
  using InputError::InputError;
};

/// Matrix is not anti-Hermitian and traceless.
class InvalidElement : public InputError {
 public:
  using InputError::InputError;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

/// A matrix that should lie on SU(n) does not.
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class ClosureError : public NumericalError {
 public:
  ClosureError(int i, int j, double residual)
      : NumericalError("basis is not closed under the bracket: pair (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") residual " + std::to_string(residual)),
        first(i),
        second(j),
        residual(residual) {}
  int first;
  int second;
  double residual;
};

class NotSemisimple : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegeneracyError : public NumericalError {
 public:
  DegeneracyError(const std::string& what, double gap) : NumericalError(what), gap(gap) {}
  double gap;
};

class EvaluationError : public NumericalError {
 public:
  EvaluationError(const std::string& what, std::size_t index)
      : NumericalError(what + " (point " + std::to_string(index) + ")"), index(index) {}
  std::size_t index;
};

class SingularSystem : public NumericalError {
 public:
  SingularSystem(const std::string& what, int rank, int dimension)
      : NumericalError(what + ": rank " + std::to_string(rank) + " of " + std::to_string(dimension)),
        rank(rank),
        dimension(dimension) {}
  int rank;
  int dimension;
};

/// Flux evaluated where it is not defined (delta = 0, p < 2, xi = 0).
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegreeCapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StatisticalInsufficiency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unsupported : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sublap
