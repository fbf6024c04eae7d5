#pragma once

#include <stdexcept>
#include <string>

namespace cocarry {

/// Bad caller input: dimension mismatches, non-finite data, invalid arguments.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Configuration file problems; `locator` points at the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& locator, const std::string& what)
      : std::runtime_error(locator + ": " + what), locator_(locator) {}
  const std::string& locator() const { return locator_; }

 private:
  std::string locator_;
};

/// Numerically rank-deficient task: "task singularity", "degenerate weighting", ...
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cocarry
