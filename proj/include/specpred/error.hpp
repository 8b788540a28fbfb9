#pragma once

#include <stdexcept>
#include <string>

namespace specpred {

// Bad input files, malformed records, out-of-range values.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace specpred
