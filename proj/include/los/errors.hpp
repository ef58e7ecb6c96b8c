#pragma once

#include <stdexcept>
#include <string>

namespace los {

// Malformed scenario or violated precondition detectable from inputs.
// The CLI maps this to a distinct exit code from runtime failures.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal engine invariant violation (capacity conservation, accounting).
class EngineError : public std::logic_error {
public:
  explicit EngineError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace los
