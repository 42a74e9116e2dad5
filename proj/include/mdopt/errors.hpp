#pragma once

#include <stdexcept>
#include <string>

namespace mdopt {

/// Zero-total-source requirement of a Neumann solve was violated.
class CompatibilityError : public std::runtime_error {
 public:
  explicit CompatibilityError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative linear solver hit its iteration cap before reaching tolerance.
class IterationLimitError : public std::runtime_error {
 public:
  explicit IterationLimitError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration file problem; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// On-disk field/trajectory data does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Line search could not find a decreasing step.
class StagnationError : public std::runtime_error {
 public:
  explicit StagnationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdopt
