#pragma once

// Gradient of the transition semigroup in a direction y via
//   <grad P_T phi(x), y> = -E[ phi(X_T) I ],   I = int_0^T h_y(t) dW_t,
// where h_y steers the deterministic mode system from y to 0 at time T.
// (X_T, I) is jointly Gaussian, so both are drawn exactly from the same
// standard normal vector: X = m + diag(f) L eps and I = (L^T w) . eps with
// G = L L^T. Var(I) = w^T G w = ||h||^2 by construction.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/control.hpp"
#include "heatmoment/observables.hpp"
#include "heatmoment/spde.hpp"
#include "heatmoment/spectral.hpp"

namespace heatmoment {

struct GradientEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  // ||h_y||; absent for the finite-difference oracle.
  std::optional<double> control_norm;
};

// Law of (X_1..X_N, I); the last coordinate is I and its mean is 0.
GaussianLaw joint_law(const StateVector& x, const NoiseProfile& profile, const ControlSignal& h,
                      double T, std::size_t N);

// config.method must be ExactGaussian. The family overload skips the Gram
// inversion when many directions share one horizon.
GradientEstimate bel_gradient(const Observable& phi, const StateVector& x, const StateVector& y,
                              const NoiseProfile& profile, const SamplerConfig& config);
GradientEstimate bel_gradient(const Observable& phi, const StateVector& x, const StateVector& y,
                              const NoiseProfile& profile, const SamplerConfig& config,
                              const BiorthogonalFamily& family);

// Central difference with common random numbers: both evaluations share the
// fluctuation draws, only the mean moves by +-eps exp(-lambda T) y.
GradientEstimate finite_difference_oracle(const Observable& phi, const StateVector& x,
                                          const StateVector& y, const NoiseProfile& profile,
                                          double eps, const SamplerConfig& config);

struct FellerEntry {
  std::string observable;
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  double value = 0.0;
  double std_error = 0.0;
  double sup_norm = 0.0;
  double control_norm = 0.0;
  double y_norm = 0.0;
  double bound = 0.0;  // sup_norm * control_norm
  bool ok = false;     // |value| <= bound + 3 std_error
};

struct FellerOptions {
  // Adds, per (x, y), tanh(kappa I / ||h_y||) written as a ridge function of
  // X_T: the bounded observable best aligned with the Ito weight.
  bool adapted_ridge = false;
  double kappa = 3.0;
};

struct FellerReport {
  std::vector<FellerEntry> entries;
  bool all_ok = true;
  // max |value| / (sup_norm ||y||) over all entries
  double empirical_constant = 0.0;
};

FellerReport strong_feller_check(const std::vector<Observable>& suite,
                                 const std::vector<StateVector>& x_grid,
                                 const std::vector<StateVector>& y_dirs, const NoiseProfile& profile,
                                 const SamplerConfig& config, const FellerOptions& options = {});

}  // namespace heatmoment
