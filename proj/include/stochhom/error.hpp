#pragma once

#include <stdexcept>
#include <string>

namespace stochhom {

// Categories double as CLI exit codes (0 is success).
enum class ErrorCategory : int {
  Config = 1,
  Generation = 2,
  Solver = 3,
  Io = 4,
  InvalidArgument = 5,
};

enum class ErrorKind {
  InvalidArgument,
  ConfigError,
  GenerationStalled,
  RelaxationFailed,
  CompensationFailed,
  DimensionTooLarge,
  SingularDifference,
  DegenerateReference,
  MaxIterationsExceeded,
  InsufficientSamples,
  PointFailed,
  IoError,
  FormatError,
};

const char* to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace stochhom
