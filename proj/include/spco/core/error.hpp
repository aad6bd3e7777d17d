#pragma once

#include <stdexcept>
#include <string>

namespace spco {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All importance weights were -inf (or NaN); nothing to normalize.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

// A sufficient-statistics invariant was breached (e.g. count underflow).
class CorruptionError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration, generator spec, or input record.
class SpecError : public Error {
 public:
  using Error::Error;
};

class InvalidRecordError : public SpecError {
 public:
  using SpecError::SpecError;
};

// Filesystem / parse failure while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spco
