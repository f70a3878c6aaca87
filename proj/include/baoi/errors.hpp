#pragma once

#include <stdexcept>
#include <string>

namespace baoi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// The only self-consistent operating points have a collision probability
/// of at least one half, where the backoff chain has no stationary regime.
class InfeasibleRegime : public Error {
 public:
  using Error::Error;
};

/// Service rate too low for the arrival rate: mu * T_F <= 1.
class Unstable : public Error {
 public:
  using Error::Error;
};

class DegenerateTopology : public Error {
 public:
  using Error::Error;
};

}  // namespace baoi
