#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace csicalib {

enum class ErrorCode {
  // trace input
  TruncatedRecord,
  LengthMismatch,
  BadPermutation,
  SchemaError,
  InvariantViolation,
  // domain
  AbsentPort,
  EmptyInput,
  ZeroChannel,
  AllZeroCsi,
  AbsentAgc,
  ZeroEntry,
  InsufficientData,
  InsufficientPorts,
  // configuration
  ConfigError,
};

std::string_view to_string(ErrorCode code);

enum class ErrorCategory { Input, Domain, Config };

ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// 1-based line number for text-format errors.
  std::optional<std::size_t> line;
  /// Byte offset of the offending frame for binary-format errors.
  std::optional<std::size_t> offset;

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace csicalib
