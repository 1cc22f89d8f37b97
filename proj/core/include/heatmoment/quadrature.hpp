#pragma once

#include <functional>

namespace heatmoment {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  unsigned max_depth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Adaptive 61-point Gauss-Kronrod on [a, b]. Throws QuadratureFailure (with
// the achieved error) when the error estimate stays above opts.abs_tol.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

}  // namespace heatmoment
