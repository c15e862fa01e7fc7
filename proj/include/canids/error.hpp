#pragma once

#include <stdexcept>
#include <string>

namespace canids {

// Single exception type for contract and input violations across the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace canids
