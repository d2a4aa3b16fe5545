#pragma once

#include <stdexcept>
#include <string>

namespace ssan {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between matrices; the message names both shapes.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// An argument value outside its documented domain (temperature <= 0,
/// zero layer width, unknown parameter name, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// A class label outside {0..K-1}; the message names the offending row.
class LabelError : public Error {
public:
  using Error::Error;
};

/// A violation of the dataset protocol (empty class, class with too few
/// instances for the requested split, empty domain side, ...).
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// Malformed input file contents; the message carries the line number.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public Error {
public:
  using Error::Error;
};

/// A loss builder produced two different values for the same inputs.
class DeterminismError : public Error {
public:
  using Error::Error;
};

}  // namespace ssan
