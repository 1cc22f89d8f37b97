#include "heatmoment/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatmoment/errors.hpp"
#include "heatmoment/parallel.hpp"

namespace heatmoment {

namespace {

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::InvalidArgument, "control horizon must be positive and finite")
        .with_field("T");
  }
}

// z_n(t1) given z_n(t0) under h:
//   exp(-lambda_n (t1 - t0)) z_n(t0)
//     + f_n sum_j w_j exp(-lambda_j (T - t1)) (1 - exp(-(lambda_n + lambda_j)(t1 - t0))) / (lambda_n + lambda_j)
// With t0 = 0 and t1 = T the last factor is exactly exponential_inner_product
// on (0,T), so trajectory endpoints and verify_null agree bit for bit.
Real advance_mode(const Real& z_start, double f, const Real& lambda, const ControlSignal& h,
                  const Real& t0, const Real& t1) {
  const long bits = h.precision_bits;
  const Real T(h.T, bits);
  const Real dt = t1 - t0;
  const Real dead = T - t1;
  Real forced(0L, bits);
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (h.weights[j].is_zero()) continue;
    const Real sum = lambda + h.rates[j];
    const Real window = -expm1(-(sum * dt)) / sum;
    forced += h.weights[j] * exp(-(h.rates[j] * dead)) * window;
  }
  return exp(-(lambda * dt)) * z_start + Real(f, bits) * forced;
}

}  // namespace

double ControlSignal::norm() const { return sqrt(norm_sq).to_double(); }

double ControlSignal::evaluate(double t) const {
  if (!(t >= 0.0 && t <= T)) {
    throw Error(ErrorKind::OutOfDomain, "control is defined on [0, T]; got t=" + std::to_string(t));
  }
  const Real lag = Real(T, precision_bits) - Real(t, precision_bits);
  Real acc(0L, precision_bits);
  for (std::size_t j = 0; j < size(); ++j) acc += weights[j] * exp(-(rates[j] * lag));
  return acc.to_double();
}

ControlSignal ControlSignal::zero(double T, std::size_t N, long bits) {
  check_horizon(T);
  ControlSignal h;
  h.T = T;
  h.precision_bits = bits;
  h.rates = rate_values(HeatRates{N}, bits);
  h.weights.assign(N, Real(0L, bits));
  h.norm_sq = Real(0L, bits);
  return h;
}

MomentTargets moment_targets(const StateVector& z0, const NoiseProfile& profile, double T,
                             std::size_t N, long bits) {
  check_horizon(T);
  if (profile.size() < N) {
    throw Error(ErrorKind::OutOfDomain, "profile stores fewer than N coefficients");
  }
  if (const auto m = profile.first_degenerate_mode(N)) throw degenerate_mode(*m);
  const RealVector rates = rate_values(HeatRates{N}, bits);
  const Real Treal(T, bits);
  MomentTargets out;
  out.mu.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    const long n = static_cast<long>(i + 1);
    Real mu = -(exp(-(rates[i] * Treal)) * Real(z0.mode(n), bits)) / Real(profile.coeff(n), bits);
    out.mu.push_back(std::move(mu));
  }
  return out;
}

ControlSignal synthesize(const StateVector& z0, const NoiseProfile& profile, double T, std::size_t N,
                         const BiorthogonalFamily& family) {
  check_horizon(T);
  if (family.size() != N || !is_heat_rates(family.gram.spec)) {
    throw Error(ErrorKind::InvalidArgument,
                "family must be built on the first N heat eigenvalues (N=" + std::to_string(N) + ")");
  }
  if (family.horizon().is_infinite() || family.horizon().value() != T) {
    throw Error(ErrorKind::HorizonMismatch,
                "family horizon " + family.horizon().str() + " does not match T=" + std::to_string(T));
  }
  const long bits = family.precision_bits;
  const MomentTargets targets = moment_targets(z0, profile, T, N, bits);

  ControlSignal h;
  h.T = T;
  h.precision_bits = bits;
  h.rates = family.gram.rates;
  h.weights = multiply(family.coeff, targets.mu);

  const RealVector moments = multiply(family.gram.entries, h.weights);
  Real norm_sq(0L, bits);
  Real defect(0L, bits);
  for (std::size_t n = 0; n < N; ++n) {
    norm_sq += h.weights[n] * moments[n];
    const Real d = abs(moments[n] - targets.mu[n]);
    if (d > defect) defect = d;
  }
  h.norm_sq = norm_sq.sign() < 0 ? Real(0L, bits) : std::move(norm_sq);
  h.moment_defect = defect.to_double();
  return h;
}

NullReport verify_null(const StateVector& z0, const NoiseProfile& profile, const ControlSignal& h,
                       double T, std::size_t N_check) {
  if (h.T != T) {
    throw Error(ErrorKind::HorizonMismatch, "control horizon does not match T");
  }
  if (N_check < h.size()) {
    throw Error(ErrorKind::InvalidArgument, "N_check must cover every controlled mode");
  }
  if (profile.size() < N_check) {
    throw Error(ErrorKind::OutOfDomain,
                "profile stores " + std::to_string(profile.size()) + " modes; N_check=" +
                    std::to_string(N_check));
  }
  const long bits = h.precision_bits;
  const RealVector rates = rate_values(HeatRates{N_check}, bits);
  const Real zero(0L, bits);
  const Real Treal(T, bits);
  const Horizon horizon = Horizon::finite(T);
  const double h_norm = h.norm();

  NullReport report;
  report.controlled_modes = h.size();
  report.residuals.reserve(N_check);
  report.tail_bounds.reserve(N_check);
  double controlled = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < N_check; ++i) {
    const long n = static_cast<long>(i + 1);
    const double f = profile.coeff(n);
    const Real z_start(z0.mode(n), bits);
    const double r = advance_mode(z_start, f, rates[i], h, zero, Treal).to_double();
    report.residuals.push_back(r);

    const double free_decay = (exp(-(rates[i] * Treal)) * abs(z_start)).to_double();
    const double g_nn = exponential_inner_product(rates[i], rates[i], horizon).to_double();
    report.tail_bounds.push_back(free_decay + std::fabs(f) * h_norm * std::sqrt(g_nn));

    (i < h.size() ? controlled : tail) += r * r;
  }
  report.controlled_l2 = std::sqrt(controlled);
  report.tail_l2 = std::sqrt(tail);
  report.l2_residual = std::sqrt(controlled + tail);
  return report;
}

StateVector propagate(const StateVector& z_start, double t0, double t1, const NoiseProfile& profile,
                      const ControlSignal& h) {
  if (!(t0 >= 0.0 && t0 <= t1 && t1 <= h.T)) {
    throw Error(ErrorKind::OutOfDomain, "propagation window must satisfy 0 <= t0 <= t1 <= T");
  }
  const std::size_t M = std::max(z_start.size(), h.size());
  if (profile.size() < M) throw Error(ErrorKind::OutOfDomain, "profile stores fewer modes than the state");
  const long bits = h.precision_bits;
  const RealVector rates = rate_values(HeatRates{M}, bits);
  const Real a(t0, bits);
  const Real b(t1, bits);
  std::vector<double> out(M);
  for (std::size_t i = 0; i < M; ++i) {
    const long n = static_cast<long>(i + 1);
    out[i] = advance_mode(Real(z_start.mode(n), bits), profile.coeff(n), rates[i], h, a, b).to_double();
  }
  return StateVector(std::move(out));
}

std::vector<StateVector> solve_trajectory(const StateVector& z0, const NoiseProfile& profile,
                                          const ControlSignal& h, const std::vector<double>& times) {
  if (!std::is_sorted(times.begin(), times.end())) {
    throw Error(ErrorKind::InvalidArgument, "times must be sorted");
  }
  std::vector<StateVector> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0 && t <= h.T)) {
      throw Error(ErrorKind::OutOfDomain, "trajectory time outside [0, T]: " + std::to_string(t));
    }
    out.push_back(propagate(z0, 0.0, t, profile, h));
  }
  return out;
}

SweepReport norm_bound_sweep(const NoiseProfile& profile, double alpha, double T, std::size_t N,
                             std::size_t trials, std::uint64_t seed, const BiorthogonalFamily& family,
                             unsigned threads) {
  SweepReport report;
  report.trials = trials;
  report.seed = seed;
  report.outside_regime = !(T > alpha);

  const ControlSignal probe = synthesize(StateVector::unit(static_cast<long>(N), N), profile, T, N, family);
  report.probe_ratio = probe.norm();

  std::vector<double> ratios(trials, 0.0);
  for_each_block(trials, 1, threads, [&](std::size_t trial, std::size_t, std::size_t) {
    RngStream rng(seed, trial);
    std::vector<double> z(N);
    for (double& c : z) c = rng.normal();
    const StateVector z0 = StateVector(std::move(z)).normalized();
    ratios[trial] = synthesize(z0, profile, T, N, family).norm() / z0.norm();
  });
  for (double r : ratios) report.trial_max = std::max(report.trial_max, r);
  report.max_ratio = std::max(report.trial_max, report.probe_ratio);
  return report;
}

SweepReport norm_bound_sweep(const NoiseProfile& profile, double alpha, double T, std::size_t N,
                             std::size_t trials, std::uint64_t seed, unsigned threads) {
  const BiorthogonalFamily family = build_family(HeatRates{N}, Horizon::finite(T));
  return norm_bound_sweep(profile, alpha, T, N, trials, seed, family, threads);
}

}  // namespace heatmoment
