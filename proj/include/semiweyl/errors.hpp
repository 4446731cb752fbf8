#pragma once

#include <stdexcept>
#include <string>

namespace semiweyl {

/// Invalid input document, schema violation or rejected parameter.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation requested outside the declared domain of a potential.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite samples, non-convergent quadrature, oversized systems.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Divergent improper integral; carries what was accumulated before giving up.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, double partial, double tail_bound)
      : NumericError(what), partial_(partial), tail_bound_(tail_bound) {}

  double partial() const { return partial_; }
  double tail_bound() const { return tail_bound_; }

 private:
  double partial_;
  double tail_bound_;
};

}  // namespace semiweyl
