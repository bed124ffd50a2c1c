#pragma once

#include <stdexcept>
#include <string>

#include "xcc/precision.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor or image dimensions.
class ShapeError : public Error {
 public:
    using Error::Error;
};

/// Argument outside an operation's domain (rates, dims, config values).
class ValueError : public Error {
 public:
    using Error::Error;
};

/// NaN or Inf produced during a forward or backward pass.
class NumericError : public Error {
 public:
    NumericError(const std::string& what, int node) : Error(what), node_(node) {}
    int node() const { return node_; }

 private:
    int node_;
};

/// File or stream failures, including malformed image files.
class IoError : public Error {
 public:
    using Error::Error;
};

/// Checkpoint files: each failure mode has its own type.
class CheckpointError : public IoError {
 public:
    using IoError::IoError;
};
class BadMagicError : public CheckpointError {
 public:
    using CheckpointError::CheckpointError;
};
class VersionMismatchError : public CheckpointError {
 public:
    using CheckpointError::CheckpointError;
};
class TruncatedError : public CheckpointError {
 public:
    using CheckpointError::CheckpointError;
};

}  // namespace xcc::inline XCC_PRECISION_NS
