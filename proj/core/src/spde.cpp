#include "heatmoment/spde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/errors.hpp"
#include "heatmoment/parallel.hpp"

namespace heatmoment {

void SamplerConfig::validate() const {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1").with_field("samples");
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1").with_field("N");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive").with_field("T");
  if (block_size < 1) throw Error(ErrorKind::InvalidArgument, "block_size must be >= 1");
  if (const auto* e = std::get_if<ExponentialEuler>(&method); e && e->steps < 1) {
    throw Error(ErrorKind::InvalidArgument, "Euler steps must be >= 1").with_field("steps");
  }
}

GaussianLaw transition_law(const StateVector& x, const NoiseProfile& profile, double T, std::size_t N) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive").with_field("T");
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1").with_field("N");
  if (profile.size() < N) throw Error(ErrorKind::OutOfDomain, "profile stores fewer than N modes");

  const Eigen::Index n = static_cast<Eigen::Index>(N);
  GaussianLaw law;
  law.mean.resize(n);
  law.cov.resize(n, n);
  law.factor.resize(n, n);

  RealMatrix lower;
  const PrecisionPolicy policy;
  const GramMatrix gram = gram_with_factor(HeatRates{N}, Horizon::finite(T), policy.start_bits(N), lower);
  const Real Treal(T, gram.precision_bits);

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double fi = profile.coeffs()[si];
    law.mean(i) = (exp(-(gram.rates[si] * Treal)) * Real(x.mode(i + 1), gram.precision_bits)).to_double();
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double fj = profile.coeffs()[sj];
      law.cov(i, j) = (Real(fi * fj, gram.precision_bits) * gram.entries(si, sj)).to_double();
      law.factor(i, j) = j <= i ? (Real(fi, gram.precision_bits) * lower(si, sj)).to_double() : 0.0;
    }
  }
  return law;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  const Eigen::Index n = cov.rows();
  if (n == 0) return {};
  if (cov.cols() != n) throw Error(ErrorKind::InvalidArgument, "covariance must be square");
  const double scale = std::max(cov.trace() / static_cast<double>(n), 0.0);
  if (scale == 0.0) {
    if (cov.cwiseAbs().maxCoeff() != 0.0) throw Error(ErrorKind::IndefiniteCovariance, "covariance has zero trace but nonzero entries");
    return Eigen::MatrixXd::Zero(n, n);
  }
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest < -1e-10 * scale) {
    throw Error(ErrorKind::IndefiniteCovariance,
                "covariance eigenvalue " + std::to_string(smallest) + " is below the jitter tolerance")
        .with_achieved(smallest);
  }
  const double jitter = 1e-14 * scale;
  Eigen::VectorXd root = (eig.eigenvalues().array() + jitter).max(0.0).sqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd sample(const GaussianLaw& law, const SamplerConfig& config) {
  config.validate();
  const Eigen::MatrixXd factor = law.factor.size() > 0 ? law.factor : covariance_factor(law.cov);
  if (factor.rows() != law.dim()) {
    throw Error(ErrorKind::InvalidArgument, "law factor does not match its mean");
  }
  const Eigen::Index rank = factor.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(config.samples), law.dim());
  for_each_block(config.samples, config.block_size, config.threads,
                 [&](std::size_t block, std::size_t begin, std::size_t end) {
                   RngStream rng(config.seed, block);
                   Eigen::VectorXd eps(rank);
                   for (std::size_t s = begin; s < end; ++s) {
                     for (Eigen::Index k = 0; k < rank; ++k) eps(k) = rng.normal();
                     out.row(static_cast<Eigen::Index>(s)) = (law.mean + factor * eps).transpose();
                   }
                 });
  return out;
}

Eigen::MatrixXd euler_oracle(const StateVector& x, const NoiseProfile& profile, double T,
                             std::size_t steps, std::size_t samples, std::uint64_t seed,
                             unsigned threads, std::size_t block_size) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1").with_field("steps");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive").with_field("T");
  const std::size_t N = x.size();
  if (profile.size() < N) throw Error(ErrorKind::OutOfDomain, "profile stores fewer modes than x");

  const double dt = T / static_cast<double>(steps);
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> decay(N), kick(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double lambda = eigenvalue(static_cast<long>(i + 1));
    decay[i] = std::exp(-lambda * dt);
    kick[i] = profile.coeffs()[i] * std::exp(-0.5 * lambda * dt) * sqrt_dt;
  }

  Eigen::MatrixXd out(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(N));
  for_each_block(samples, block_size, threads, [&](std::size_t block, std::size_t begin, std::size_t end) {
    RngStream rng(seed, block);
    std::vector<double> state(N);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t i = 0; i < N; ++i) state[i] = x[i];
      for (std::size_t k = 0; k < steps; ++k) {
        const double xi = rng.normal();
        for (std::size_t i = 0; i < N; ++i) state[i] = decay[i] * state[i] + kick[i] * xi;
      }
      for (std::size_t i = 0; i < N; ++i) {
        out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = state[i];
      }
    }
  });
  return out;
}

Eigen::MatrixXd euler_bias_budget(const NoiseProfile& profile, double T, std::size_t steps,
                                  std::size_t N) {
  const double dt = T / static_cast<double>(steps);
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd budget(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = eigenvalue(i + 1) + eigenvalue(j + 1);
      const double ff = std::fabs(profile.coeffs()[static_cast<std::size_t>(i)] *
                                  profile.coeffs()[static_cast<std::size_t>(j)]);
      budget(i, j) = ff * a * a * T * dt * dt / 24.0;
    }
  }
  return budget;
}

SampleMoments sample_moments(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "sample moments need at least two draws");
  const double dn = static_cast<double>(n);
  SampleMoments m;
  m.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / (dn - 1.0);
  m.mean_stderr = (m.cov.diagonal() / dn).cwiseSqrt();
  m.cov_stderr.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::ArrayXd prod = centered.col(i).array() * centered.col(j).array();
      const double var = (prod - prod.mean()).square().sum() / (dn - 1.0);
      m.cov_stderr(i, j) = std::sqrt(var / dn);
    }
  }
  return m;
}

McEstimate semigroup_expectation(const Observable& phi, const StateVector& x,
                                 const NoiseProfile& profile, double T, const SamplerConfig& config) {
  config.validate();
  const std::size_t N = config.N;
  std::vector<RunningStats> parts(block_count(config.samples, config.block_size));

  if (const auto* euler = std::get_if<ExponentialEuler>(&config.method)) {
    const Eigen::MatrixXd draws = euler_oracle(x.resized(N), profile, T, euler->steps, config.samples,
                                               config.seed, config.threads, config.block_size);
    for_each_block(config.samples, config.block_size, config.threads,
                   [&](std::size_t block, std::size_t begin, std::size_t end) {
                     std::vector<double> row(N);
                     for (std::size_t s = begin; s < end; ++s) {
                       for (std::size_t i = 0; i < N; ++i) {
                         row[i] = draws(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
                       }
                       parts[block].push(phi(row));
                     }
                   });
  } else {
    const GaussianLaw law = transition_law(x, profile, T, N);
    const Eigen::Index rank = law.factor.cols();
    for_each_block(config.samples, config.block_size, config.threads,
                   [&](std::size_t block, std::size_t begin, std::size_t end) {
                     RngStream rng(config.seed, block);
                     Eigen::VectorXd eps(rank);
                     Eigen::VectorXd draw(law.dim());
                     for (std::size_t s = begin; s < end; ++s) {
                       for (Eigen::Index k = 0; k < rank; ++k) eps(k) = rng.normal();
                       draw = law.mean + law.factor * eps;
                       parts[block].push(phi(std::span<const double>(draw.data(), N)));
                     }
                   });
  }
  const RunningStats total = pairwise_merge(parts);
  return {total.mean, total.stderr_of_mean(), config.samples};
}

}  // namespace heatmoment
