#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace layerpot {

enum class ErrorKind {
  InvalidGeometry,
  OutOfRange,
  LengthMismatch,
  SingularPoint,
  SingularSystem,
  NearBoundary,
  WrongRegion,
  InvalidProbe,
  NoLimit,
  IncompatibleData,
  NumericalFailure,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "InvalidGeometry";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NearBoundary: return "NearBoundary";
    case ErrorKind::WrongRegion: return "WrongRegion";
    case ErrorKind::InvalidProbe: return "InvalidProbe";
    case ErrorKind::NoLimit: return "NoLimit";
    case ErrorKind::IncompatibleData: return "IncompatibleData";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` selects the failure class.
/// `values()` carries numeric diagnostics (e.g. the compatibility pairings
/// that caused an IncompatibleData rejection).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<double> values = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        values_(std::move(values)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  ErrorKind kind_;
  std::vector<double> values_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

inline void require_length(long got, long expected, std::string_view where) {
  if (got != expected) {
    throw Error(ErrorKind::LengthMismatch, std::string(where) + ": expected length " +
                                               std::to_string(expected) + ", got " +
                                               std::to_string(got));
  }
}

}  // namespace layerpot
