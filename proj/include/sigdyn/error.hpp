// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sigdyn {

/// Failure categories. The numeric values double as CLI exit codes and
/// C API status codes.
enum class ErrorKind : int {
  validation = 1,  // malformed input, violated precondition
  runtime = 2,     // numeric failure, I/O, solver diagnostics
  capacity = 3,    // problem size beyond configured limits
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorKind::runtime, msg);
}
[[noreturn]] inline void fail_capacity(const std::string& msg) {
  throw Error(ErrorKind::capacity, msg);
}

}  // namespace sigdyn
