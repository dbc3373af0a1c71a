#pragma once

#include <stdexcept>
#include <string>

namespace qrad {

/// Malformed or self-inconsistent configuration (bad grids, bad scenario files,
/// violated call preconditions).  The CLI maps this family to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation refused to produce a number it cannot stand behind: packets
/// escaping the grid, non-finite field samples, under-resolved sampling,
/// retarded times falling outside a stored history.  CLI exit code 3.
struct NumericalRejection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qrad
