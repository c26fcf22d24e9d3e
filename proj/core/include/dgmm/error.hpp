#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dgmm {

enum class ErrorKind {
  invalid_name,
  invalid_time,
  schema_violation,
  out_of_range,
  corruption,
  invalid_cue,
  incomparable,
  not_recalled,
  domain_restriction,
  precondition,
  invalid_parameters,
  ordering,
  busy,
  io,
  parse,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the engine carries a kind so callers (the CLI in
// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when the persistence log fails verification. `record` is the 1-based
// index of the first bad record, `offset` its byte offset in the log file.
class CorruptionError : public Error {
 public:
  CorruptionError(const std::string& message, std::size_t record,
                  std::uint64_t offset)
      : Error(ErrorKind::corruption, message), record_(record), offset_(offset) {}

  std::size_t record() const noexcept { return record_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::size_t record_;
  std::uint64_t offset_;
};

}  // namespace dgmm
