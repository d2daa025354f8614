#pragma once

#include <stdexcept>
#include <string>

namespace ncsir {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter, state, control or setting failed validation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An integrated trajectory produced NaN or Inf.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Forward integration produced a compartment below -1e-9.
class NegativityBreach : public Error {
 public:
  using Error::Error;
};

/// A stability query was made for a DFE whose theorem-case hypotheses are not met.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// A scenario override key outside the documented knobs.
class UnknownOverride : public Error {
 public:
  using Error::Error;
};

}  // namespace ncsir
