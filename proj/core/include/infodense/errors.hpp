#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infodense {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  contract,           // caller violated a precondition (shape, range)
  schema,             // input file layout does not match the expected schema
  config,             // invalid run configuration
  missing_sensor,     // a requested sensor has no records
  empty_result,       // an operation produced nothing to work with
  insufficient_data,  // too few samples/frames/sensors
  degenerate,         // zero variance, zero matrix, zero denominator
  numeric,            // non-finite values during computation
  io,                 // a file could not be opened, read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::contract, message);
}

}  // namespace infodense
