#pragma once

// Test observables on truncated mode vectors. Every member of the smooth
// suite is bounded by 1 with a bounded gradient; the linear and indicator
// observables are for oracle checks and exploratory sweeps.

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace heatmoment {

struct Observable {
  std::string name;
  double sup_norm = std::numeric_limits<double>::infinity();
  std::function<double(std::span<const double>)> fn;

  double operator()(std::span<const double> x) const { return fn(x); }
  Observable scaled(double c) const;
};

// Modes are 1-based throughout.
Observable constant_observable(double c);
Observable linear_coordinate(long mode);
Observable tanh_coordinate(long mode, double scale = 1.0, double shift = 0.0);
// exp(-(x_mode - center)^2 / (2 width^2))
Observable gaussian_bump(long mode, double center = 0.0, double width = 1.0);
Observable cosine_coordinate(long mode, double frequency = 1.0, double phase = 0.0);
// 1{x_mode > threshold}
Observable indicator_coordinate(long mode, double threshold = 0.0);
// tanh(kappa * <direction, x - center>)
Observable ridge_tanh(std::vector<double> direction, std::vector<double> center, double kappa);

// The fixed bounded suite used by gradient checks:
// tanh(x_1), tanh(x_2), bump(x_1), cos(x_1).
std::vector<Observable> smooth_suite();

// Parses "name" or "name:key=value,key=value", e.g. "tanh:mode=1,scale=2".
// Recognized names: const, linear, tanh, bump, cos, indicator.
Observable parse_observable(const std::string& selector);

}  // namespace heatmoment
