#include "heatmoment/observables.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "heatmoment/errors.hpp"

namespace heatmoment {

namespace {

std::size_t slot(long mode) {
  if (mode < 1) throw Error(ErrorKind::InvalidMode, "observable mode must be >= 1").with_mode(mode);
  return static_cast<std::size_t>(mode - 1);
}

double coordinate(std::span<const double> x, std::size_t i) { return i < x.size() ? x[i] : 0.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Observable Observable::scaled(double c) const {
  Observable out;
  out.name = fmt(c) + "*" + name;
  out.sup_norm = std::fabs(c) * sup_norm;
  out.fn = [inner = fn, c](std::span<const double> x) { return c * inner(x); };
  return out;
}

Observable constant_observable(double c) {
  return {"const(" + fmt(c) + ")", std::fabs(c), [c](std::span<const double>) { return c; }};
}

Observable linear_coordinate(long mode) {
  const std::size_t i = slot(mode);
  return {"linear(" + std::to_string(mode) + ")", std::numeric_limits<double>::infinity(),
          [i](std::span<const double> x) { return coordinate(x, i); }};
}

Observable tanh_coordinate(long mode, double scale, double shift) {
  const std::size_t i = slot(mode);
  return {"tanh(" + std::to_string(mode) + "," + fmt(scale) + "," + fmt(shift) + ")", 1.0,
          [i, scale, shift](std::span<const double> x) {
            return std::tanh(scale * (coordinate(x, i) - shift));
          }};
}

Observable gaussian_bump(long mode, double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  const std::size_t i = slot(mode);
  return {"bump(" + std::to_string(mode) + "," + fmt(center) + "," + fmt(width) + ")", 1.0,
          [i, center, width](std::span<const double> x) {
            const double u = (coordinate(x, i) - center) / width;
            return std::exp(-0.5 * u * u);
          }};
}

Observable cosine_coordinate(long mode, double frequency, double phase) {
  const std::size_t i = slot(mode);
  return {"cos(" + std::to_string(mode) + "," + fmt(frequency) + "," + fmt(phase) + ")", 1.0,
          [i, frequency, phase](std::span<const double> x) {
            return std::cos(frequency * coordinate(x, i) + phase);
          }};
}

Observable indicator_coordinate(long mode, double threshold) {
  const std::size_t i = slot(mode);
  return {"indicator(" + std::to_string(mode) + "," + fmt(threshold) + ")", 1.0,
          [i, threshold](std::span<const double> x) { return coordinate(x, i) > threshold ? 1.0 : 0.0; }};
}

Observable ridge_tanh(std::vector<double> direction, std::vector<double> center, double kappa) {
  if (direction.size() != center.size()) {
    throw Error(ErrorKind::InvalidArgument, "ridge direction and center sizes differ");
  }
  return {"ridge_tanh(" + fmt(kappa) + ")", 1.0,
          [v = std::move(direction), c = std::move(center), kappa](std::span<const double> x) {
            double u = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) u += v[j] * (coordinate(x, j) - c[j]);
            return std::tanh(kappa * u);
          }};
}

std::vector<Observable> smooth_suite() {
  return {tanh_coordinate(1), tanh_coordinate(2), gaussian_bump(1), cosine_coordinate(1)};
}

Observable parse_observable(const std::string& selector) {
  const auto colon = selector.find(':');
  const std::string name = selector.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos) {
    std::istringstream rest(selector.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::ConfigError, "observable parameter '" + item + "' lacks '='")
            .with_field("phi");
      }
      const std::string key = item.substr(0, eq);
      const std::string text = item.substr(eq + 1);
      char* end = nullptr;
      const double value = std::strtod(text.c_str(), &end);
      if (end == text.c_str() || *end != '\0') {
        throw Error(ErrorKind::ConfigError, "observable parameter '" + key + "' is not a number")
            .with_field("phi");
      }
      params[key] = value;
    }
  }
  auto get = [&](const char* key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  const long mode = static_cast<long>(get("mode", 1.0));
  if (name == "const") return constant_observable(get("value", 1.0));
  if (name == "linear") return linear_coordinate(mode);
  if (name == "tanh") return tanh_coordinate(mode, get("scale", 1.0), get("shift", 0.0));
  if (name == "bump") return gaussian_bump(mode, get("center", 0.0), get("width", 1.0));
  if (name == "cos") return cosine_coordinate(mode, get("freq", 1.0), get("phase", 0.0));
  if (name == "indicator") return indicator_coordinate(mode, get("threshold", 0.0));
  throw Error(ErrorKind::ConfigError, "unknown observable '" + name + "'").with_field("phi");
}

}  // namespace heatmoment
