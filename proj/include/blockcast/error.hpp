#pragma once

#include <stdexcept>
#include <string>

namespace blockcast {

// Bad user-supplied configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Malformed or missing input data (files, windows, arrays).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of a numeric routine does not hold for the given data.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace blockcast
