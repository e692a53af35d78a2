#include "stochhom/error.hpp"

namespace stochhom {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::GenerationStalled: return "GenerationStalled";
    case ErrorKind::RelaxationFailed: return "RelaxationFailed";
    case ErrorKind::CompensationFailed: return "CompensationFailed";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::SingularDifference: return "SingularDifference";
    case ErrorKind::DegenerateReference: return "DegenerateReference";
    case ErrorKind::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::PointFailed: return "PointFailed";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConfigError:
      return ErrorCategory::Config;
    case ErrorKind::GenerationStalled:
    case ErrorKind::RelaxationFailed:
    case ErrorKind::CompensationFailed:
    case ErrorKind::DimensionTooLarge:
      return ErrorCategory::Generation;
    case ErrorKind::SingularDifference:
    case ErrorKind::DegenerateReference:
    case ErrorKind::MaxIterationsExceeded:
    case ErrorKind::InsufficientSamples:
    case ErrorKind::PointFailed:
      return ErrorCategory::Solver;
    case ErrorKind::IoError:
    case ErrorKind::FormatError:
      return ErrorCategory::Io;
    case ErrorKind::InvalidArgument:
      return ErrorCategory::InvalidArgument;
  }
  return ErrorCategory::InvalidArgument;
}

}  // namespace stochhom
