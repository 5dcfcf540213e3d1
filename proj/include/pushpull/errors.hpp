#pragma once

#include <stdexcept>
#include <string>

namespace pushpull {

// Error taxonomy, mapped to distinct process exit codes by the CLI.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, out-of-range parameter, parse failure.
struct ConfigError : Error {
  using Error::Error;
};

// The mixing graphs do not admit the spanning-tree structure the
// push-pull architecture requires.
struct AssumptionError : Error {
  using Error::Error;
};

// Non-finite values, non-convergent iterations, push-sum degeneracy.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace pushpull
