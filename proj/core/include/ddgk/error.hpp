#pragma once

#include <stdexcept>
#include <string>

namespace ddgk {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Matrix or layer shapes do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A mandatory input file is missing or unreadable.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Input file is present but malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf appeared in parameters, gradients or losses.
class NumericFault : public Error {
 public:
  using Error::Error;
};

// Training diverged; carries the epoch at which it was detected.
class TrainingFault : public Error {
 public:
  TrainingFault(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// An object was used in a state its contract forbids (e.g. unfrozen source).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Checkpoint on disk failed version or integrity checks.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddgk
