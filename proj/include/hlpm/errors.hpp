#pragma once

#include <stdexcept>
#include <string>

namespace hlpm {

// Argument outside the domain of an operation (u < 0, mu <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input: bad config field, non-unit mass, grid mismatch.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative method failed to converge, or a scheme produced a value it
// must never produce (negative density, asymmetric whole-line state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvennessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hlpm

namespace hlpm {

// Error raised inside a harness pipeline, tagged with the stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace hlpm
