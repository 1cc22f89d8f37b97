#include "heatmoment/bel.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "heatmoment/errors.hpp"
#include "heatmoment/parallel.hpp"

namespace heatmoment {

namespace {

void check_exact(const SamplerConfig& config) {
  config.validate();
  if (!std::holds_alternative<ExactGaussian>(config.method)) {
    throw Error(ErrorKind::InvalidArgument, "gradient estimates sample the exact joint law only")
        .with_field("method");
  }
}

void check_direction(const StateVector& y, std::size_t N) {
  for (std::size_t i = N; i < y.size(); ++i) {
    if (y[i] != 0.0) {
      throw Error(ErrorKind::InvalidArgument, "direction has components beyond the first N modes")
          .with_field("y");
    }
  }
}

GaussianLaw build_joint(const StateVector& x, const NoiseProfile& profile, const ControlSignal& h,
                        const GramMatrix& gram, const RealMatrix& lower) {
  const std::size_t N = gram.size();
  const long bits = gram.precision_bits;
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  const Real Treal(h.T, bits);

  RealVector w;
  w.reserve(N);
  for (const Real& wj : h.weights) w.emplace_back(wj, bits);
  const RealVector Gw = multiply(gram.entries, w);

  GaussianLaw law;
  law.joint_ito = true;
  law.mean = Eigen::VectorXd::Zero(n + 1);
  law.cov.resize(n + 1, n + 1);
  law.factor = Eigen::MatrixXd::Zero(n + 1, n);
  for (std::size_t i = 0; i < N; ++i) {
    const Eigen::Index ei = static_cast<Eigen::Index>(i);
    const Real fi(profile.coeffs()[i], bits);
    law.mean(ei) = (exp(-(gram.rates[i] * Treal)) * Real(x.mode(ei + 1), bits)).to_double();
    for (std::size_t j = 0; j < N; ++j) {
      const Eigen::Index ej = static_cast<Eigen::Index>(j);
      law.cov(ei, ej) = (fi * Real(profile.coeffs()[j], bits) * gram.entries(i, j)).to_double();
      if (j <= i) law.factor(ei, ej) = (fi * lower(i, j)).to_double();
    }
    const double cross = (fi * Gw[i]).to_double();
    law.cov(ei, n) = cross;
    law.cov(n, ei) = cross;

    // u = L^T w
    Real u(0L, bits);
    for (std::size_t j = i; j < N; ++j) u += lower(j, i) * w[j];
    law.factor(n, ei) = u.to_double();
  }
  law.cov(n, n) = h.norm_sq.to_double();
  return law;
}

// -mean(phi(X) I) over draws of the joint law.
GradientEstimate integrate_joint(const Observable& phi, const GaussianLaw& law, const SamplerConfig& config) {
  const Eigen::Index n = law.dim() - 1;
  const Eigen::Index rank = law.factor.cols();
  std::vector<RunningStats> parts(block_count(config.samples, config.block_size));
  for_each_block(config.samples, config.block_size, config.threads,
                 [&](std::size_t block, std::size_t begin, std::size_t end) {
                   RngStream rng(config.seed, block);
                   Eigen::VectorXd eps(rank);
                   Eigen::VectorXd draw(law.dim());
                   for (std::size_t s = begin; s < end; ++s) {
                     for (Eigen::Index k = 0; k < rank; ++k) eps(k) = rng.normal();
                     draw.noalias() = law.mean + law.factor * eps;
                     const double value = phi(std::span<const double>(draw.data(), static_cast<std::size_t>(n)));
                     parts[block].push(-value * draw(n));
                   }
                 });
  const RunningStats total = pairwise_merge(parts);
  return {total.mean, total.stderr_of_mean(), config.samples, std::nullopt};
}

GaussianLaw joint_from_family(const StateVector& x, const NoiseProfile& profile, const ControlSignal& h,
                              const BiorthogonalFamily& family) {
  return build_joint(x, profile, h, family.gram, family.gram_factor);
}

}  // namespace

GaussianLaw joint_law(const StateVector& x, const NoiseProfile& profile, const ControlSignal& h,
                      double T, std::size_t N) {
  if (h.T != T) throw Error(ErrorKind::HorizonMismatch, "control horizon does not match T");
  if (h.size() != N) throw Error(ErrorKind::InvalidArgument, "control must carry exactly N weights");
  if (profile.size() < N) throw Error(ErrorKind::OutOfDomain, "profile stores fewer than N modes");
  RealMatrix lower;
  const GramMatrix gram = gram_with_factor(HeatRates{N}, Horizon::finite(T), h.precision_bits, lower);
  return build_joint(x, profile, h, gram, lower);
}

GradientEstimate bel_gradient(const Observable& phi, const StateVector& x, const StateVector& y,
                              const NoiseProfile& profile, const SamplerConfig& config,
                              const BiorthogonalFamily& family) {
  check_exact(config);
  check_direction(y, config.N);
  const ControlSignal h = synthesize(y.resized(config.N), profile, config.T, config.N, family);
  GradientEstimate out = integrate_joint(phi, joint_from_family(x, profile, h, family), config);
  out.control_norm = h.norm();
  return out;
}

GradientEstimate bel_gradient(const Observable& phi, const StateVector& x, const StateVector& y,
                              const NoiseProfile& profile, const SamplerConfig& config) {
  check_exact(config);
  check_direction(y, config.N);
  // Surface a degenerate mode before paying for the Gram inversion.
  if (profile.size() >= config.N) {
    if (const auto m = profile.first_degenerate_mode(config.N)) throw degenerate_mode(*m);
  }
  const BiorthogonalFamily family = build_family(HeatRates{config.N}, Horizon::finite(config.T));
  return bel_gradient(phi, x, y, profile, config, family);
}

GradientEstimate finite_difference_oracle(const Observable& phi, const StateVector& x,
                                          const StateVector& y, const NoiseProfile& profile,
                                          double eps, const SamplerConfig& config) {
  check_exact(config);
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive").with_field("eps");
  check_direction(y, config.N);
  const std::size_t N = config.N;
  const GaussianLaw law = transition_law(x, profile, config.T, N);
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  Eigen::VectorXd shift(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    shift(i) = eps * std::exp(-eigenvalue(i + 1) * config.T) * y.mode(i + 1);
  }
  const Eigen::VectorXd plus_mean = law.mean + shift;
  const Eigen::VectorXd minus_mean = law.mean - shift;

  std::vector<RunningStats> parts(block_count(config.samples, config.block_size));
  for_each_block(config.samples, config.block_size, config.threads,
                 [&](std::size_t block, std::size_t begin, std::size_t end) {
                   RngStream rng(config.seed, block);
                   Eigen::VectorXd e(n), noise(n), plus(n), minus(n);
                   for (std::size_t s = begin; s < end; ++s) {
                     for (Eigen::Index k = 0; k < n; ++k) e(k) = rng.normal();
                     noise.noalias() = law.factor * e;
                     plus = plus_mean + noise;
                     minus = minus_mean + noise;
                     const double up = phi(std::span<const double>(plus.data(), N));
                     const double down = phi(std::span<const double>(minus.data(), N));
                     parts[block].push((up - down) / (2.0 * eps));
                   }
                 });
  const RunningStats total = pairwise_merge(parts);
  return {total.mean, total.stderr_of_mean(), config.samples, std::nullopt};
}

FellerReport strong_feller_check(const std::vector<Observable>& suite,
                                 const std::vector<StateVector>& x_grid,
                                 const std::vector<StateVector>& y_dirs, const NoiseProfile& profile,
                                 const SamplerConfig& config, const FellerOptions& options) {
  check_exact(config);
  const std::size_t N = config.N;
  const BiorthogonalFamily family = build_family(HeatRates{N}, Horizon::finite(config.T));

  FellerReport report;
  for (std::size_t yi = 0; yi < y_dirs.size(); ++yi) {
    check_direction(y_dirs[yi], N);
    const ControlSignal h = synthesize(y_dirs[yi].resized(N), profile, config.T, N, family);
    const double h_norm = h.norm();
    const double y_norm = y_dirs[yi].norm();

    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
      const GaussianLaw law = joint_from_family(x_grid[xi], profile, h, family);

      std::vector<Observable> observables = suite;
      if (options.adapted_ridge && h_norm > 0.0) {
        // I = sum_j (w_j / f_j)(X_j - m_j) exactly, since X - m = diag(f) L eps.
        std::vector<double> direction(N), center(N);
        for (std::size_t j = 0; j < N; ++j) {
          direction[j] = h.weights[j].to_double() / profile.coeffs()[j] / h_norm;
          center[j] = law.mean(static_cast<Eigen::Index>(j));
        }
        observables.push_back(ridge_tanh(std::move(direction), std::move(center), options.kappa));
      }

      for (const Observable& phi : observables) {
        const GradientEstimate g = integrate_joint(phi, law, config);
        FellerEntry e;
        e.observable = phi.name;
        e.x_index = xi;
        e.y_index = yi;
        e.value = g.value;
        e.std_error = g.std_error;
        e.sup_norm = phi.sup_norm;
        e.control_norm = h_norm;
        e.y_norm = y_norm;
        e.bound = phi.sup_norm * h_norm;
        e.ok = std::fabs(g.value) <= e.bound + 3.0 * g.std_error;
        report.all_ok = report.all_ok && e.ok;
        if (phi.sup_norm > 0.0 && y_norm > 0.0) {
          report.empirical_constant =
              std::max(report.empirical_constant, std::fabs(g.value) / (phi.sup_norm * y_norm));
        }
        report.entries.push_back(std::move(e));
      }
    }
  }
  return report;
}

}  // namespace heatmoment
