#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lumion {

// Precondition or argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a failed accelerator has no free, healthy replacement.
class NoSpareAvailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the i-th request of a batch cannot be routed in the residual
// graph. Routes committed for earlier requests stay committed.
class RouteUnavailable : public std::runtime_error {
 public:
  RouteUnavailable(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Malformed scenario or population document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lumion
