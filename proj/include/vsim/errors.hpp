#pragma once

#include <stdexcept>
#include <string>

namespace vsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
struct IoError : Error {
  using Error::Error;
};

// Bytes were readable but are not a valid file of the expected format.
struct FormatError : Error {
  using Error::Error;
};

// Parameters violate a precondition (bad dimensions, cutoff above Nyquist,
// duplicate phases, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Pattern parameter estimation found no significant correlation peak.
struct EstimationError : Error {
  using Error::Error;
};

}  // namespace vsim
