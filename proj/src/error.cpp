#include "csicalib/error.hpp"

namespace csicalib {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::AbsentPort: return "AbsentPort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroChannel: return "ZeroChannel";
    case ErrorCode::AllZeroCsi: return "AllZeroCsi";
    case ErrorCode::AbsentAgc: return "AbsentAgc";
    case ErrorCode::ZeroEntry: return "ZeroEntry";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InsufficientPorts: return "InsufficientPorts";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedRecord:
    case ErrorCode::LengthMismatch:
    case ErrorCode::BadPermutation:
    case ErrorCode::SchemaError:
    case ErrorCode::InvariantViolation:
      return ErrorCategory::Input;
    case ErrorCode::ConfigError:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Domain;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace csicalib
