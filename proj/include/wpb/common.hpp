#pragma once

#include <stdexcept>
#include <string>

namespace wpb {

/// Invalid or inconsistent configuration, CLI arguments, or input files.
/// CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure at run time: diverging sampler, non-SPD matrix where one
/// is required, assignment solver overflow, and similar. CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wpb
