#pragma once

#include <stdexcept>
#include <string>

namespace rlsp {

/// Unknown names, incompatible options, malformed config files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Out-of-range indices, dimension mismatches and similar caller mistakes.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object that is not ready for it (e.g. an untrained model).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Divergence, NaN, zero-likelihood observations.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rlsp
