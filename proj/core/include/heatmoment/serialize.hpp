#pragma once

// JSON forms of profiles, families, controls and reports. Extended-precision
// numbers are written as decimal strings with enough digits to reparse to the
// same binary value; doubles go through nlohmann's shortest round-trip output.
// Parsers throw ConfigError naming the offending field.

#include <string>

#include <nlohmann/json.hpp>

#include "heatmoment/bel.hpp"
#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/control.hpp"
#include "heatmoment/spde.hpp"
#include "heatmoment/spectral.hpp"

namespace heatmoment {

using Json = nlohmann::json;

Json to_json(const StateVector& v);
StateVector state_from_json(const Json& j);

// {"kind": "dirac"|"explicit"|"gaussian_decay", "p", "coeffs", "alpha", "C", "s", "N"}
Json to_json(const NoiseProfile& profile);
NoiseProfile profile_from_json(const Json& j);

// {"rates", "T", "precision_bits", "residual", "coeff_matrix", "attempts", "rate_kind"}
Json to_json(const BiorthogonalFamily& family);
BiorthogonalFamily family_from_json(const Json& j);

// {"T", "N", "precision_bits", "weights", "norm", "norm_sq", "moment_defect"}
Json to_json(const ControlSignal& h);
ControlSignal control_from_json(const Json& j);

Json to_json(const NullReport& r);
NullReport null_report_from_json(const Json& j);

Json to_json(const SweepReport& r);
SweepReport sweep_report_from_json(const Json& j);

Json to_json(const ThetaNormReport& r);
Json to_json(const DInfinite& d);
Json to_json(const LowerBoundReport& r);

Json to_json(const McEstimate& e);
McEstimate mc_estimate_from_json(const Json& j);

Json to_json(const SampleMoments& m);

// {"value", "stderr", "samples", "control_norm"?}
Json to_json(const GradientEstimate& g);
GradientEstimate gradient_from_json(const Json& j);

Json to_json(const FellerReport& r);
FellerReport feller_report_from_json(const Json& j);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

// Shortest decimal that reparses to the same double.
std::string format_double(double v);

}  // namespace heatmoment
