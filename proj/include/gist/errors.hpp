// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gist {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sink/source failure while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File does not look like the expected format (magic, version, field sanity).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File has the right shape but its contents are inconsistent
/// (truncated payload, trailing bytes, manifest mismatch).
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Data violates a declared invariant (non-finite values, duplicate ids).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments outside an operation's contract.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Requested computation would materialize a matrix beyond the configured caps.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Target pool spans no usable subspace (e.g. all-zero gradients).
class DegenerateSubspaceError : public Error {
 public:
  using Error::Error;
};

/// Eigengap too small for a stable subspace-perturbation statement.
class DegenerateGapError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gist
