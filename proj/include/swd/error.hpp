#pragma once

#include <stdexcept>
#include <string>

namespace swd {

/// Shapes or lengths that do not fit together.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid operator, training, or command configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed external data (tensor files, mask records, PGM images).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace swd
