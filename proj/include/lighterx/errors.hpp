#pragma once

#include <stdexcept>
#include <string>

namespace lighterx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, id maps, caches).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numeric domain violation (log of a nonpositive value, degenerate parameters).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Shape or argument mismatch detected at an API boundary.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace lighterx
