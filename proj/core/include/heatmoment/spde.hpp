#pragma once

// Exact-in-law sampling of dX = -A X dt + f dW truncated to N Dirichlet
// modes. With one scalar Brownian motion the mode vector at time T is
// Gaussian with mean exp(-lambda_n T) x_n and covariance
// f_n f_m (1 - exp(-(lambda_n + lambda_m) T)) / (lambda_n + lambda_m).
// That covariance is a scaled Gram matrix, so laws carry its square root
// diag(f) L computed from an extended-precision Cholesky factor of G.
// The exponential-Euler path scheme exists only as an oracle.

#include <cstddef>
#include <cstdint>
#include <variant>

#include <Eigen/Dense>

#include "heatmoment/observables.hpp"
#include "heatmoment/spectral.hpp"

namespace heatmoment {

struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  // dim x rank with cov = factor * factor^T; empty means "factor cov on demand".
  Eigen::MatrixXd factor;
  // When set, the last coordinate is the Ito integral of a control.
  bool joint_ito = false;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

struct ExactGaussian {};
struct ExponentialEuler {
  std::size_t steps = 1;
};
using SamplingMethod = std::variant<ExactGaussian, ExponentialEuler>;

struct SamplerConfig {
  std::size_t N = 1;
  double T = 1.0;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  SamplingMethod method = ExactGaussian{};
  unsigned threads = 1;
  std::size_t block_size = 4096;

  void validate() const;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

GaussianLaw transition_law(const StateVector& x, const NoiseProfile& profile, double T, std::size_t N);

// Square root of a symmetric PSD matrix. Tries Cholesky, then an eigen
// decomposition with jitter 1e-14 * trace / n; throws IndefiniteCovariance
// if the smallest eigenvalue is below -1e-10 * trace / n.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

// samples x dim matrix, one draw per row.
Eigen::MatrixXd sample(const GaussianLaw& law, const SamplerConfig& config);

// X(t + dt) = exp(-lambda dt) X(t) + f exp(-lambda dt / 2) dW, one dW shared by
// every mode. Returns samples x x.size().
Eigen::MatrixXd euler_oracle(const StateVector& x, const NoiseProfile& profile, double T,
                             std::size_t steps, std::size_t samples, std::uint64_t seed,
                             unsigned threads = 1, std::size_t block_size = 4096);

// Entrywise |Cov_euler - Cov_exact| bound: the noise term is a midpoint rule
// for int_0^T exp(-(lambda_n + lambda_m) s) ds, so the gap is at most
// |f_n f_m| (lambda_n + lambda_m)^2 T dt^2 / 24.
Eigen::MatrixXd euler_bias_budget(const NoiseProfile& profile, double T, std::size_t steps,
                                  std::size_t N);

struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_stderr;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd cov_stderr;
};

SampleMoments sample_moments(const Eigen::MatrixXd& samples);

McEstimate semigroup_expectation(const Observable& phi, const StateVector& x,
                                 const NoiseProfile& profile, double T, const SamplerConfig& config);

}  // namespace heatmoment
