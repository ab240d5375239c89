#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace srisk {

enum class ErrorCode {
  OverflowGuard,
  NonFinite,
  InvalidDomain,
  InvalidParameter,
  DimensionMismatch,
  SizeMismatch,
  FactorizationFailure,
  NonConvergence,
  BracketNotFound,
  DegenerateDenominator,
  InvalidStart,
  InsufficientData,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Malformed configuration input. `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ConfigError, line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace srisk
