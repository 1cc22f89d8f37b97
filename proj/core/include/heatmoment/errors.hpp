#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heatmoment {

enum class ErrorKind {
  InvalidMode,
  OutOfDomain,
  InvalidArgument,
  QuadratureFailure,
  DegenerateProfile,
  DegenerateMode,
  SingularGram,
  PrecisionExhausted,
  InvalidBeta,
  IndefiniteCovariance,
  HorizonMismatch,
  ConfigError,
  ReportKindMismatch,
  ValidationFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every module reports failures through this one exception type. The optional
// fields carry the payload named by the error kind (the offending mode for
// DegenerateMode, the achieved residual or tolerance for PrecisionExhausted
// and QuadratureFailure).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  std::optional<long> mode() const noexcept { return mode_; }
  std::optional<double> achieved() const noexcept { return achieved_; }
  std::optional<std::string> field() const { return field_; }

  Error& with_mode(long n) {
    mode_ = n;
    return *this;
  }
  Error& with_achieved(double value) {
    achieved_ = value;
    return *this;
  }
  Error& with_field(std::string name) {
    field_ = std::move(name);
    return *this;
  }

 private:
  ErrorKind kind_;
  std::optional<long> mode_;
  std::optional<double> achieved_;
  std::optional<std::string> field_;
};

inline Error degenerate_mode(long n) {
  return Error(ErrorKind::DegenerateMode,
               "noise profile vanishes in mode " + std::to_string(n) +
                   "; that mode cannot be controlled")
      .with_mode(n);
}

}  // namespace heatmoment
