#pragma once

#include <stdexcept>
#include <string>

namespace racebias {

enum class ErrorKind {
  InvalidModulus,
  InvalidClass,
  DegenerateRace,
  OutOfRange,
  Resource,
  MustBePrimitive,
  Precision,
  Parse,
  Validation,
  Coverage,
  InsufficientCoverage,
  InvalidMeasure,
  Budget,
  GridInsufficient,
  InvalidExponent,
  LinnikSearch,
  Infeasible,
  UnsupportedModulus,
  Config,
};

inline const char *to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidModulus: return "invalid-modulus";
    case ErrorKind::InvalidClass: return "invalid-class";
    case ErrorKind::DegenerateRace: return "degenerate-race";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::MustBePrimitive: return "must-be-primitive";
    case ErrorKind::Precision: return "precision";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::InsufficientCoverage: return "insufficient-coverage";
    case ErrorKind::InvalidMeasure: return "invalid-measure";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::GridInsufficient: return "grid-insufficient";
    case ErrorKind::InvalidExponent: return "invalid-exponent";
    case ErrorKind::LinnikSearch: return "linnik-search";
    case ErrorKind::Infeasible: return "infeasible-n";
    case ErrorKind::UnsupportedModulus: return "unsupported-modulus";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// CLI exit code: 3 for resource/coverage problems, 2 for everything else
  /// (usage, configuration, invalid input).
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Resource:
      case ErrorKind::Coverage:
      case ErrorKind::InsufficientCoverage:
      case ErrorKind::OutOfRange:
      case ErrorKind::Budget:
      case ErrorKind::GridInsufficient:
      case ErrorKind::LinnikSearch:
      case ErrorKind::Precision:
        return 3;
      default:
        return 2;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) { throw Error(kind, what); }

}  // namespace racebias
