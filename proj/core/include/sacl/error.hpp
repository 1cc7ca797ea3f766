#pragma once

#include <stdexcept>
#include <string>

namespace sacl {

// Root of every exception thrown by the library. Subclasses name the failure
// category so callers (and the CLI) can map them to messages and exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Input that makes the operation mathematically undefined, e.g. a vector whose
// norm is below the normalization floor.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// A call sequence or argument combination that violates an operation's
// protocol (too few samples, stale cache, missing prototype, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sacl
