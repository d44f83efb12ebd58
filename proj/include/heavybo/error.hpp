#pragma once

#include <stdexcept>
#include <string>

namespace heavybo {

// Error categories double as CLI exit codes.
enum class ErrorKind : int {
  kConfig = 1,
  kData = 2,
  kRuntime = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Invalid parameters or inconsistent configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

/// Argument outside the mathematical domain of a function.
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Input data that cannot be processed (empty, degenerate, malformed).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// Numerical failure while running an algorithm.
class RuntimeFailure : public Error {
 public:
  explicit RuntimeFailure(const std::string& what) : Error(ErrorKind::kRuntime, what) {}
};

class DivergedError : public RuntimeFailure {
 public:
  DivergedError(const std::string& what, long epoch)
      : RuntimeFailure(what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

/// Raised by the hard-margin solver when no separating hyperplane exists.
class InfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace heavybo
