#pragma once

#include <stdexcept>
#include <string>

namespace qfnlos {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical precondition was violated (s <= 0, s2 <= s1, k not in {2,4},
/// nonpositive pitch/bin_length, ...). CLI exit code 3.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or inconsistent (non-finite values, out-of-grid
/// pixel indices, grid mismatches, ...). CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file does not follow one of the on-disk formats. CLI exit code 2.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// A bin-slice stream broke its contract (dimension mismatch, premature end).
/// CLI exit code 2.
class StreamError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace qfnlos
