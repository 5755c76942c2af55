#pragma once

#include <stdexcept>
#include <string>

namespace neo {

// Error taxonomy maps onto the CLI exit-code contract:
// 1 usage, 2 I/O, 3 protocol, 4 numeric.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace neo
