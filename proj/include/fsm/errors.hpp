#pragma once

#include <stdexcept>
#include <string>

namespace fsm {

// Bad user input: unknown keys, out-of-range parameters, malformed files.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure conditions contracts promise to signal.
// The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct NearZeroDeterminant : NumericalError {
  explicit NearZeroDeterminant(const std::string& what) : NumericalError(what) {}
};

struct SingularBasePoint : NumericalError {
  explicit SingularBasePoint(const std::string& what) : NumericalError(what) {}
};

struct InsufficientDecay : NumericalError {
  explicit InsufficientDecay(const std::string& what) : NumericalError(what) {}
};

struct DegenerateRoot : NumericalError {
  explicit DegenerateRoot(const std::string& what) : NumericalError(what) {}
};

}  // namespace fsm
