#pragma once

#include <stdexcept>
#include <string>

namespace xfer {

// Caller-side mistakes: bad arguments, invalid specs, configurations the
// solvers refuse. The CLI maps this whole family to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidSpec : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnequalMass : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptyMeasure : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnsupportedConfiguration : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InsufficientData : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Failures discovered while computing. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateMass : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class WindowTooLarge : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace xfer
