#include "heatmoment/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "heatmoment/errors.hpp"

namespace heatmoment {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// sin(pi q) after reducing q to its nearest-integer offset. Exactly zero when
// q is an integer, which keeps rational delta positions honestly degenerate.
double sin_pi(double q) {
  const double k = std::nearbyint(q);
  const double r = q - k;
  const double s = std::sin(kPi * r);
  return std::fmod(std::fabs(k), 2.0) == 1.0 ? -s : s;
}

}  // namespace

ModeIndex::ModeIndex(long n) : n_(n) {
  if (n < 1) {
    throw Error(ErrorKind::InvalidMode, "mode index must be >= 1, got " + std::to_string(n))
        .with_mode(n);
  }
}

double eigenvalue(ModeIndex n) {
  const double k = static_cast<double>(n.value());
  return kPi * kPi * k * k;
}

double eigenvalue(long n) { return eigenvalue(ModeIndex(n)); }

double eigenfunction_eval(ModeIndex n, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::OutOfDomain, "eigenfunctions live on [0,1]; got x=" + std::to_string(x));
  }
  return kSqrt2 * sin_pi(static_cast<double>(n.value()) * x);
}

// ---------------------------------------------------------------------------
// StateVector

StateVector StateVector::unit(long n, std::size_t N) {
  const ModeIndex m(n);
  if (static_cast<std::size_t>(m.value()) > N) {
    throw Error(ErrorKind::OutOfDomain, "unit vector mode exceeds truncation");
  }
  StateVector v = zeros(N);
  v.coeffs_[static_cast<std::size_t>(n - 1)] = 1.0;
  return v;
}

double StateVector::mode(long n) const noexcept {
  if (n < 1 || static_cast<std::size_t>(n) > coeffs_.size()) return 0.0;
  return coeffs_[static_cast<std::size_t>(n - 1)];
}

double StateVector::norm_sq() const noexcept {
  double acc = 0.0;
  for (double c : coeffs_) acc += c * c;
  return acc;
}

double StateVector::norm() const noexcept { return std::sqrt(norm_sq()); }

StateVector StateVector::resized(std::size_t N) const {
  std::vector<double> out(N, 0.0);
  std::copy_n(coeffs_.begin(), std::min(N, coeffs_.size()), out.begin());
  return StateVector(std::move(out));
}

StateVector StateVector::scaled(double c) const {
  std::vector<double> out(coeffs_);
  for (double& v : out) v *= c;
  return StateVector(std::move(out));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorKind::InvalidArgument, "cannot normalize the zero state");
  return scaled(1.0 / n);
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  const std::size_t N = std::max(a.size(), b.size());
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = a.mode(static_cast<long>(i + 1)) + b.mode(static_cast<long>(i + 1));
  }
  return StateVector(std::move(out));
}

StateVector operator-(const StateVector& a, const StateVector& b) { return a + b.scaled(-1.0); }

// ---------------------------------------------------------------------------
// Projection

Projection project(const ProjectionSource& g, std::size_t N, const QuadratureOptions& opts) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "projection needs N >= 1");
  Projection out;
  out.tolerance = opts.abs_tol;
  std::vector<double> coeffs(N, 0.0);

  if (std::holds_alternative<ZeroFunction>(g)) {
    out.closed_form = true;
  } else if (const auto* mode = std::get_if<Eigenmode>(&g)) {
    const ModeIndex m(mode->n);
    if (static_cast<std::size_t>(m.value()) <= N) coeffs[static_cast<std::size_t>(m.value() - 1)] = 1.0;
    out.closed_form = true;
  } else if (std::holds_alternative<ParabolaBump>(g)) {
    for (std::size_t i = 0; i < N; ++i) {
      const double n = static_cast<double>(i + 1);
      const double odd = (i % 2 == 0) ? 2.0 : 0.0;  // 1 - (-1)^n
      coeffs[i] = 2.0 * kSqrt2 * odd / std::pow(kPi * n, 3);
    }
    out.closed_form = true;
  } else {
    const auto& fn = std::get<std::function<double(double)>>(g);
    for (std::size_t i = 0; i < N; ++i) {
      const double n = static_cast<double>(i + 1);
      auto integrand = [&](double x) { return fn(x) * kSqrt2 * std::sin(kPi * n * x); };
      const QuadratureResult r = integrate(integrand, 0.0, 1.0, opts);
      coeffs[i] = r.value;
      out.quadrature_error = std::max(out.quadrature_error, r.error_estimate);
    }
  }
  out.state = StateVector(std::move(coeffs));
  return out;
}

// ---------------------------------------------------------------------------
// Noise profiles

NoiseProfile::NoiseProfile(std::vector<double> coeffs, double s, std::optional<LowerBound> bound)
    : NoiseProfile(Explicit{}, std::move(coeffs), s, bound) {}

NoiseProfile::NoiseProfile(ProfileKind kind, std::vector<double> coeffs, double s,
                           std::optional<LowerBound> bound)
    : kind_(kind), coeffs_(std::move(coeffs)), s_(s), bound_(bound) {
  if (!(s >= 0.0 && s < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "regularity index s must lie in [0,1)").with_field("s");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "non-finite profile coefficient");
  }
  if (bound_) {
    if (!(bound_->C > 0.0 && bound_->alpha > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "lower bound needs C > 0 and alpha > 0");
    }
    const auto report = verify_lower_bound(*this, bound_->C, bound_->alpha, coeffs_.size());
    if (!report.holds) {
      throw Error(ErrorKind::InvalidArgument,
                  "claimed lower bound fails at mode " + std::to_string(report.worst_n))
          .with_mode(report.worst_n);
    }
  }
}

double NoiseProfile::coeff(long n) const {
  if (n < 1 || static_cast<std::size_t>(n) > coeffs_.size()) {
    throw Error(ErrorKind::OutOfDomain,
                "profile stores " + std::to_string(coeffs_.size()) + " modes; asked for " +
                    std::to_string(n))
        .with_mode(n);
  }
  return coeffs_[static_cast<std::size_t>(n - 1)];
}

std::optional<long> NoiseProfile::first_degenerate_mode(std::size_t N) const {
  const std::size_t upto = std::min(N, coeffs_.size());
  for (std::size_t i = 0; i < upto; ++i) {
    if (coeffs_[i] == 0.0) return static_cast<long>(i + 1);
  }
  return std::nullopt;
}

NoiseProfile delta_profile(double p, std::size_t N, double s) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::DegenerateProfile,
                "delta position must lie strictly inside (0,1); got " + std::to_string(p))
        .with_field("p");
  }
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "profile needs N >= 1");
  std::vector<double> coeffs(N);
  for (std::size_t i = 0; i < N; ++i) {
    coeffs[i] = kSqrt2 * sin_pi(static_cast<double>(i + 1) * p);
  }
  return NoiseProfile(DiracDelta{p}, std::move(coeffs), s, std::nullopt);
}

NoiseProfile gaussian_decay_profile(double alpha, double C, std::size_t N, double s) {
  if (!(alpha > 0.0 && C > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gaussian decay needs alpha > 0 and C > 0");
  }
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "profile needs N >= 1");
  std::vector<double> coeffs(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double n = static_cast<double>(i + 1);
    coeffs[i] = C * std::exp(-alpha * kPi * kPi * n * n);
  }
  return NoiseProfile(GaussianDecay{alpha, C}, std::move(coeffs), s, std::nullopt);
}

LowerBoundReport verify_lower_bound(const NoiseProfile& profile, double C, double alpha,
                                    std::size_t N) {
  if (!(C > 0.0 && alpha > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "lower bound needs C > 0 and alpha > 0");
  }
  if (N > profile.size()) {
    throw Error(ErrorKind::OutOfDomain, "profile stores fewer than N modes");
  }
  LowerBoundReport report;
  report.log_best_C = std::numeric_limits<double>::infinity();
  const double log_C = std::log(C);
  for (std::size_t i = 0; i < N; ++i) {
    const long n = static_cast<long>(i + 1);
    const double f = std::fabs(profile.coeffs()[i]);
    if (f == 0.0) {
      report.degenerate_modes.push_back(n);
      if (report.log_best_C != -std::numeric_limits<double>::infinity()) {
        report.log_best_C = -std::numeric_limits<double>::infinity();
        report.worst_n = n;
      }
      continue;
    }
    const double dn = static_cast<double>(n);
    const double log_ratio = std::log(f) + alpha * kPi * kPi * dn * dn;
    if (log_ratio < report.log_best_C) {
      report.log_best_C = log_ratio;
      report.worst_n = n;
    }
  }
  report.best_C = std::exp(report.log_best_C);
  report.holds = report.degenerate_modes.empty() && report.log_best_C >= log_C;
  return report;
}

double dist_to_integers(double p, long n) {
  const double q = static_cast<double>(n) * p;
  return std::fabs(q - std::nearbyint(q));
}

SineSandwich sine_sandwich(double p, long n) {
  SineSandwich out;
  out.distance = dist_to_integers(p, n);
  out.sine = std::fabs(sin_pi(static_cast<double>(n) * p));
  out.lower = 2.0 * out.distance;
  out.upper = kPi * out.distance;
  out.holds = out.lower <= out.sine && out.sine <= out.upper;
  return out;
}

double borel_cantelli_bound(double alpha, long n) {
  const double k = static_cast<double>(ModeIndex(n).value());
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  return 4.0 * std::exp(-alpha * kPi * kPi * k * k);
}

BorelCantelliSum borel_cantelli_partial(double alpha, long n) {
  BorelCantelliSum out{0.0, 0.0};
  for (long k = 1; k <= n; ++k) out.partial_sum += borel_cantelli_bound(alpha, k);
  // Term ratios past n are at most exp(-alpha pi^2 (2n+3)): geometric tail.
  const double next = borel_cantelli_bound(alpha, n + 1);
  const double ratio = std::exp(-alpha * kPi * kPi * (2.0 * static_cast<double>(n) + 3.0));
  out.tail_bound = next / (1.0 - ratio);
  return out;
}

SobolevNorm sobolev_norm(const NoiseProfile& profile, double s) {
  double acc = 0.0;
  const std::size_t N = profile.size();
  for (std::size_t i = 0; i < N; ++i) {
    const double lambda = eigenvalue(static_cast<long>(i + 1));
    const double f = profile.coeffs()[i];
    acc += std::pow(lambda, -s) * f * f;
  }
  SobolevNorm out{std::sqrt(acc), std::numeric_limits<double>::infinity(), true};
  const double dN = static_cast<double>(N);
  if (std::holds_alternative<DiracDelta>(profile.kind())) {
    // f_n^2 <= 2 and sum_{n>N} n^{-2s} <= N^{1-2s}/(2s-1).
    if (s > 0.5) out.tail_bound_sq = 2.0 * std::pow(kPi, -2.0 * s) * std::pow(dN, 1.0 - 2.0 * s) / (2.0 * s - 1.0);
  } else if (const auto* g = std::get_if<GaussianDecay>(&profile.kind())) {
    const double a = 2.0 * g->alpha * kPi * kPi;
    const double first = std::pow(eigenvalue(static_cast<long>(N + 1)), -s) * g->C * g->C *
                         std::exp(-a * (dN + 1.0) * (dN + 1.0));
    out.tail_bound_sq = first / (1.0 - std::exp(-a * (2.0 * dN + 3.0)));
  }
  return out;
}

HsIntegral hs_integral(const NoiseProfile& profile, double s, double beta, double T,
                       const QuadratureOptions& opts) {
  if (!(beta > 0.0 && beta < 0.5)) {
    throw Error(ErrorKind::InvalidBeta, "beta must lie in (0, 1/2); got " + std::to_string(beta));
  }
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  const double power = 1.0 - 2.0 * beta;
  const double jacobian = 1.0 / power;
  const auto coeffs = profile.coeffs();
  auto integrand = [&](double u) {
    const double t = std::pow(u, 1.0 / power);
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == 0.0) continue;
      acc += coeffs[i] * coeffs[i] * std::exp(-2.0 * eigenvalue(static_cast<long>(i + 1)) * t);
    }
    return jacobian * acc;
  };
  const QuadratureResult r = integrate(integrand, 0.0, std::pow(T, power), opts);
  return {r.value, r.error_estimate, beta < (1.0 - s) / 2.0};
}

}  // namespace heatmoment
