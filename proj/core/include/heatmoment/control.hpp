#pragma once

// Null controls for the mode system z_n' + lambda_n z_n = f_n h(t) built by the
// moment method: h(t) = sum_j w_j exp(-lambda_j (T - t)) with G w = mu and
// mu_n = -exp(-lambda_n T) z_{0,n} / f_n. Every time integral below is a
// closed-form exponential expression evaluated in extended precision.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/real.hpp"
#include "heatmoment/spectral.hpp"

namespace heatmoment {

struct ControlSignal {
  double T = 0.0;
  RealVector rates;    // lambda_1..lambda_N at the weights' precision
  RealVector weights;  // h(t) = sum_j w_j exp(-lambda_j (T - t))
  Real norm_sq;        // w^T G w = ||h||^2 on (0,T)
  long precision_bits = Real::kDefaultBits;
  // max_n |(G w)_n - mu_n| at synthesis time; 0 for hand-built signals.
  double moment_defect = 0.0;

  std::size_t size() const noexcept { return weights.size(); }
  double norm() const;
  // h(t) for t in [0,T]; OutOfDomain otherwise.
  double evaluate(double t) const;

  static ControlSignal zero(double T, std::size_t N, long bits = Real::kDefaultBits);
};

struct MomentTargets {
  RealVector mu;
};

// Throws DegenerateMode(m) for the first m <= N with f_m == 0.
MomentTargets moment_targets(const StateVector& z0, const NoiseProfile& profile, double T,
                             std::size_t N, long bits = Real::kDefaultBits);

// The family must be built on lambda_n = pi^2 n^2, n <= N, and horizon T.
ControlSignal synthesize(const StateVector& z0, const NoiseProfile& profile, double T, std::size_t N,
                         const BiorthogonalFamily& family);

struct NullReport {
  std::vector<double> residuals;    // z_n(T) for n = 1..N_check
  std::vector<double> tail_bounds;  // exp(-lambda_n T)|z_{0,n}| + |f_n| ||h|| sqrt(G_nn)
  double l2_residual = 0.0;
  double controlled_l2 = 0.0;  // modes n <= N
  double tail_l2 = 0.0;        // modes N < n <= N_check
  std::size_t controlled_modes = 0;
};

NullReport verify_null(const StateVector& z0, const NoiseProfile& profile, const ControlSignal& h,
                       double T, std::size_t N_check);

// Mode values at the requested times, sized like z0 (padded to the control
// size). Throws OutOfDomain for times outside [0,T].
std::vector<StateVector> solve_trajectory(const StateVector& z0, const NoiseProfile& profile,
                                          const ControlSignal& h, const std::vector<double>& times);

// Advance a state known at time t0 to t1 under the same control.
StateVector propagate(const StateVector& z_start, double t0, double t1, const NoiseProfile& profile,
                      const ControlSignal& h);

struct SweepReport {
  double max_ratio = 0.0;    // max ||h|| / ||z0|| over all probes
  double probe_ratio = 0.0;  // z0 = e_N
  double trial_max = 0.0;    // random directions only
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool outside_regime = false;  // T <= alpha
};

SweepReport norm_bound_sweep(const NoiseProfile& profile, double alpha, double T, std::size_t N,
                             std::size_t trials, std::uint64_t seed,
                             const BiorthogonalFamily& family, unsigned threads = 1);
SweepReport norm_bound_sweep(const NoiseProfile& profile, double alpha, double T, std::size_t N,
                             std::size_t trials, std::uint64_t seed, unsigned threads = 1);

}  // namespace heatmoment
