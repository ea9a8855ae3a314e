#pragma once

#include <stdexcept>
#include <string>

namespace spiked {

// Invalid inputs: parameters outside the supported region (subcritical spike
// strength, gamma <= 0, argument outside a law's domain, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Valid inputs on which a numerical procedure failed to converge
// (quadrature, bracketing, eigensolver).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spiked
