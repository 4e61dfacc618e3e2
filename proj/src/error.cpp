#include "stmado/error.hpp"

namespace stmado {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgs: return "InvalidArgs";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::UnrealizableLag: return "UnrealizableLag";
    case ErrorKind::UnsupportedLag: return "UnsupportedLag";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NonIntegerShift: return "NonIntegerShift";
    case ErrorKind::NotSupported: return "NotSupported";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InsufficientLags: return "InsufficientLags";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::IndivisibleBlocks: return "IndivisibleBlocks";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool Error::is_config_error() const noexcept {
  switch (kind_) {
    case ErrorKind::NotPSD:
    case ErrorKind::NoConvergence:
    case ErrorKind::SupportViolation:
      return false;
    default:
      return true;
  }
}

}  // namespace stmado
