#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that violate a documented precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class SpecificationError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Failures of the numerics themselves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeightError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ContourError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::string previous, std::string last)
      : NumericalError(what), previous_(std::move(previous)), last_(std::move(last)) {}
  // The two final refinements, as decimal strings.
  const std::string& previous() const { return previous_; }
  const std::string& last() const { return last_; }

 private:
  std::string previous_;
  std::string last_;
};

}  // namespace ergo
