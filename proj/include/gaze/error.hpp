#pragma once

#include <stdexcept>
#include <string>

namespace gaze {

/// Failure categories used across the library. The CLI maps these onto its
/// exit-code contract (config/definition -> 2, integrity -> 3, the rest -> 1).
enum class ErrorKind {
  InvalidArgument,
  OutOfRange,
  Schema,
  Parse,
  Io,
  Domain,
  EmptyData,
  DegenerateSignal,
  Definition,
  Download,
  Integrity,
  Extraction,
  Security,
  Extent,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace detail

}  // namespace gaze
