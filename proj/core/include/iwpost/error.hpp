#pragma once

#include <stdexcept>
#include <string>

namespace iwpost {

// Bad input: dimension mismatch, unknown names, out-of-range counts.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced NaN or an undefined quantity such as -inf - (-inf).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model lacks something the operation needs (e.g. an analytic gradient).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical self-check failed: grid too narrow, too few samples, normalizer mismatch.
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iwpost
