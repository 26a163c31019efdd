#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, missing paths, invalid configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

// A document failed schema validation. The message names the offending field path.
class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

// Feature or segmentation provider failure (transport, timeout, fixture miss).
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftwatch
