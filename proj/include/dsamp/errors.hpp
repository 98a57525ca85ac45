#pragma once

#include <stdexcept>
#include <string>

namespace dsamp {

// Bad or inconsistent input data: malformed files, out-of-range parameters,
// preconditions violated by caller-supplied values. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A condition the library guarantees internally was found broken. Maps to
// CLI exit code 3.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace dsamp
