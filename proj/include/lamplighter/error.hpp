#pragma once

#include <stdexcept>
#include <string>

namespace lamplighter {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside the domain of an operation (p <= 1/2, s >= s0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The walk reached the boundary of a truncated graph.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A run exceeded its step budget before completing.
class StepBudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace lamplighter
