#pragma once

#include <stdexcept>
#include <string>

namespace chebdir {

/// Raised when an LP or minimax solve cannot reach its requested accuracy.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, parameter string or input file.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace chebdir
