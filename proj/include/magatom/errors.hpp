#pragma once

#include <stdexcept>
#include <string>

namespace magatom {

// Input that violates a type invariant or a precondition. Maps to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while a run is in progress. Maps to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coincident charges with hard Coulomb interaction.
class SingularityError : public RuntimeError {
 public:
  SingularityError(const std::string& what, double time) : RuntimeError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Observation point too close to the atom for the far-field expansion.
class ValidityRegionError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

}  // namespace magatom
