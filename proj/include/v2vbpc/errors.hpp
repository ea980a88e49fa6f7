// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace v2vbpc {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidOrientation,
  kDegenerateGeometry,
  kNumericalFailure,
  kConfig,
  kIo,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kInvalidOrientation: return "invalid orientation";
    case ErrorKind::kDegenerateGeometry: return "degenerate geometry";
    case ErrorKind::kNumericalFailure: return "numerical failure";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

}  // namespace v2vbpc
