#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvf {

// Coarse failure category. The CLI prints it as the machine-parsable prefix of
// its single error line.
enum class ErrorKind {
  parse,
  integrity,
  validation,
  io,
  config,
  usage,
  conflict,
  not_found,
  empty,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    case ErrorKind::usage: return "usage";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::empty: return "empty";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cvf
