#pragma once

#include <stdexcept>
#include <string>

namespace distrep {

// Error taxonomy mirrored by the CLI exit codes:
// config_error -> 2, data_error -> 3, numeric_error -> 4.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace distrep
