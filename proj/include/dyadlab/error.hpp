#pragma once

#include <stdexcept>
#include <string>

namespace dyadlab {

// Every recoverable failure in the library surfaces as this exception.  The
// message is short and stable ("insufficient resolution", "budget exceeded",
// ...) so callers and the CLI can match on it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dyadlab
