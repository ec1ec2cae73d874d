#pragma once

#include <stdexcept>
#include <string>

namespace mmassoc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid shapes, arguments or preconditions.
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Bad configuration values (unknown keys, out of range settings).
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error
{
public:
  using Error::Error;
};

/// A checkpoint does not match the data or configuration it is used with.
class CheckpointMismatch : public Error
{
public:
  using Error::Error;
};

/// CTC labeling cannot be emitted in the available number of frames.
class InfeasibleSequence : public Error
{
public:
  InfeasibleSequence() : Error("sequence too short") {}
};

} // namespace mmassoc
