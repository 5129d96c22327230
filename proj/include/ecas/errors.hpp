#pragma once

#include <stdexcept>
#include <string>

namespace ecas {

// Malformed input text (scenario or dataset files). Messages carry the
// offending position or line number.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a domain invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ecas
