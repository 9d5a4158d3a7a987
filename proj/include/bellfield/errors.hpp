#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bellfield {

enum class ErrorKind {
  invalid_argument,
  unknown_mode,
  cutoff_too_small,
  parse_error,
  zero_coincidence,
  zero_intensity,
  degenerate_lo,
  cat_degenerate,
  zero_denominator,
  backend_mismatch,
  optimizer_shortfall,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::unknown_mode: return "UnknownMode";
    case ErrorKind::cutoff_too_small: return "CutoffTooSmall";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::zero_coincidence: return "ZeroCoincidence";
    case ErrorKind::zero_intensity: return "ZeroIntensity";
    case ErrorKind::degenerate_lo: return "DegenerateLO";
    case ErrorKind::cat_degenerate: return "CatDegenerate";
    case ErrorKind::zero_denominator: return "ZeroDenominator";
    case ErrorKind::backend_mismatch: return "BackendMismatch";
    case ErrorKind::optimizer_shortfall: return "OptimizerShortfall";
  }
  return "Unknown";
}

/// Every domain failure in the library is reported as an Error carrying a
/// machine-readable kind; the CLI maps it straight to its error document.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bellfield
