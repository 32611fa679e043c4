#pragma once

#include <stdexcept>
#include <string>

namespace framealign {

// All recoverable failures in the library surface as this type. The message
// is meant to be shown to a user as-is.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace framealign
