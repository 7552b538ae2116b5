#pragma once

#include <stdexcept>
#include <string>

namespace qctf {

// Raised when a computed quantity leaves the range the mathematics guarantees
// (norm drift, Q outside [0, 1/4], non-real entanglement pole sums, ...).
// The CLI maps it to exit code 3.
class NumericContractError : public std::runtime_error {
 public:
  explicit NumericContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qctf
