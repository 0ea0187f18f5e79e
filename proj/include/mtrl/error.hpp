#pragma once

#include <stdexcept>
#include <string>

namespace mtrl {

// Shape or dimension mismatch between a tensor and the layer/section consuming it.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN or Inf reached a place where only finite numbers are allowed.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or argument outside the documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mtrl
