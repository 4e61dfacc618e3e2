#pragma once

#include <stdexcept>
#include <string>

namespace stmado {

/// Error categories raised by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgs,
  InvalidParams,
  UnrealizableLag,
  UnsupportedLag,
  NotPSD,
  BudgetExceeded,
  NonIntegerShift,
  NotSupported,
  NoConvergence,
  InsufficientLags,
  SupportViolation,
  IndivisibleBlocks,
  LengthMismatch,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by bad input rather than numerical trouble.
  bool is_config_error() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace stmado
