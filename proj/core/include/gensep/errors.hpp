#pragma once

#include <stdexcept>
#include <string>

namespace gensep {

// Bad option values, unknown enum kinds, invalid bounds. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible matrix/spectrogram shapes.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad data handed to an operation (negative magnitudes, silent input,
// missing or corrupt files). CLI exit code 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf detected mid-computation, ill-conditioned systems. CLI exit code 4.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gensep
