#pragma once

#include <stdexcept>
#include <string>

namespace smartsnap {

// Base for every error raised by the library. Subclasses let the CLI map
// failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, unknown keys, malformed task files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Precondition violations on library calls (unknown app, bad lengths, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Network / endpoint failures that survived the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in an optimization step.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace smartsnap
