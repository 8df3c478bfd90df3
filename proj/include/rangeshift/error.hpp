#pragma once

#include <stdexcept>
#include <string>

namespace rangeshift {

/// Invalid user input: bad config key, value or invariant. Maps to exit status 1.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Numerical failure (non-convergence, NaN/Inf, positivity breach). Maps to exit status 2.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested speeds do not exist for the given parameters (e.g. c above c**).
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A measurement could not be taken (too few points, empty fit region, ...).
class DiagnosticError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace rangeshift
