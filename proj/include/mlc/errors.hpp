#pragma once

#include <stdexcept>
#include <string>

namespace mlc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input vector or matrix fails a state invariant (norm, Hermiticity, PSD,
/// trace range, dimension mismatch).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Coherence level k outside {1, ..., d} for the operation at hand.
class LevelOutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Effect operator violates 0 <= A <= I.
class InvalidEffectError : public Error {
 public:
  using Error::Error;
};

/// Probability-like scale parameter outside its admissible interval.
class InvalidScaleError : public Error {
 public:
  using Error::Error;
};

/// A sampling constraint cannot be met (e.g. requested rank exceeds dim).
class InvalidConstraintError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input (JSON state files, certificates).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Requested conversion probability exceeds the admissible bound.
class BoundViolationError : public Error {
 public:
  BoundViolationError(const std::string& msg, double bound)
      : Error(msg), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

/// An operation required a resource state (coherence rank above the level)
/// but was handed a free one. `which` names the offending argument.
class NotResourceStateError : public Error {
 public:
  NotResourceStateError(const std::string& msg, std::string which)
      : Error(msg), which_(std::move(which)) {}
  const std::string& which() const { return which_; }

 private:
  std::string which_;
};

}  // namespace mlc
