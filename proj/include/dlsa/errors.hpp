#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dlsa {

// Base for every error the library raises. The CLI maps the subclasses onto
// exit codes: InputError -> 2, NumericalError -> 3, ConfigError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class TooFewRows : public InputError {
 public:
  using InputError::InputError;
};

/// Malformed CSV content; carries the 1-based line number of the offending row.
class CsvError : public InputError {
 public:
  CsvError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ChecksumMismatch : public InputError {
 public:
  using InputError::InputError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularHessian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A local fit failed on a specific partition; the pipeline aborts on it.
class PartitionFitError : public NumericalError {
 public:
  PartitionFitError(std::uint64_t partition_id, const std::string& what)
      : NumericalError("partition " + std::to_string(partition_id) + ": " + what),
        partition_id_(partition_id) {}
  std::uint64_t partition_id() const noexcept { return partition_id_; }

 private:
  std::uint64_t partition_id_;
};

}  // namespace dlsa
