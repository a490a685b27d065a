#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memrlab {

/// Invalid caller-supplied argument (negative sizes, empty sample sets, N = 0 for split bounds).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A point outside the support of a density. `field()` names the offending input.
class DomainError : public std::domain_error {
public:
  DomainError(std::string field, const std::string &what)
      : std::domain_error(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Requested enumeration or feature width exceeds the configured limit.
class CapacityError : public std::runtime_error {
public:
  CapacityError(const std::string &what, std::size_t required, std::size_t allowed)
      : std::runtime_error(what + " (required " + std::to_string(required) +
                           ", allowed " + std::to_string(allowed) + ")"),
        required_(required), allowed_(allowed) {}
  std::size_t required() const noexcept { return required_; }
  std::size_t allowed() const noexcept { return allowed_; }

private:
  std::size_t required_;
  std::size_t allowed_;
};

/// The model does not support the requested operation (e.g. gradients of a discrete family).
class CapabilityError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Non-finite gradient, NaN loss and similar numeric breakdowns.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Hyperparameter chain left the configured bounded region.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Neural MI estimator produced a degenerate classifier.
class EstimationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Configuration file or override could not be parsed; message carries the key path.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace memrlab
