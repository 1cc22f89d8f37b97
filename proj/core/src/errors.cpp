#include "heatmoment/errors.hpp"

namespace heatmoment {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidMode: return "InvalidMode";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::DegenerateMode: return "DegenerateMode";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::InvalidBeta: return "InvalidBeta";
    case ErrorKind::IndefiniteCovariance: return "IndefiniteCovariance";
    case ErrorKind::HorizonMismatch: return "HorizonMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ReportKindMismatch: return "ReportKindMismatch";
    case ErrorKind::ValidationFailure: return "ValidationFailure";
  }
  return "Unknown";
}

}  // namespace heatmoment
