#pragma once

#include <stdexcept>
#include <string>

namespace pamlab {

// Invalid argument outside an operation's domain (t <= 0, s outside (0,t), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Adaptive quadrature ran out of subdivisions, or a simulation produced a
// non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double partial = 0.0, double error = 0.0)
      : std::runtime_error(what), partial_value(partial), error_estimate(error) {}
  double partial_value;
  double error_estimate;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_path(field) {}
  std::string field_path;
};

}  // namespace pamlab
