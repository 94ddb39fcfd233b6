#pragma once

#include <stdexcept>
#include <string>

namespace aoicache {

// A caller broke a documented precondition (bad action index, shape mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration could not be parsed or failed validation. `field()` names the
// offending key (dotted path) when the error is attributable to one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace aoicache

namespace aoicache {

// An enumerated state space exceeds the solver's limit.
class StateSpaceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace aoicache
