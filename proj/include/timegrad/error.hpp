// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace timegrad {

/// Coarse failure classes. The CLI maps each one to a documented exit code.
enum class ErrorClass { Config, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

/// A NaN or Inf was produced (or would have escaped) somewhere.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

/// A caller broke a precondition of an API (wrong argument range, wrong call order).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

/// backward() was asked to differentiate something that is not on the active tape.
class GraphError : public Error {
 public:
  explicit GraphError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

/// Malformed or inconsistent input data (ingestion, CSV parsing, misaligned files).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

/// Checkpoint decoding failures. Each subclass is a distinct failure mode.
class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& what) : Error(ErrorClass::Data, what) {}
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointShapeError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace timegrad
