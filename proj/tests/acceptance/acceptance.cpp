// One line per criterion: "PASS criterion N: ..." or "FAIL criterion N: ...".
// Usage: heatmoment_acceptance [--criterion N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "heatmoment/bel.hpp"
#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/control.hpp"
#include "heatmoment/errors.hpp"
#include "heatmoment/spde.hpp"
#include "heatmoment/spectral.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace heatmoment;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NoiseProfile decay_profile(std::size_t N) { return gaussian_decay_profile(0.01, 1.0, N); }

SamplerConfig sampler(std::size_t N, double T, std::size_t samples, std::uint64_t seed) {
  SamplerConfig c;
  c.N = N;
  c.T = T;
  c.samples = samples;
  c.seed = seed;
  return c;
}

// --- 1 ---------------------------------------------------------------------
Outcome biorthogonality() {
  const BiorthogonalFamily fam = build_family(HeatRates{10}, Horizon::finite(1.0));
  // Fresh Gram at the family precision, independent of the one used to invert.
  const GramMatrix g = gram_matrix(HeatRates{10}, Horizon::finite(1.0), fam.precision_bits);
  const double defect = biorthogonality_defect(g, fam.coeff).to_double();
  return {defect < 1e-20, fmt("N=10 T=1 max|<e_n,theta_m> - delta| = %.3e at %ld bits (tol 1e-20)", defect,
                              fam.precision_bits)};
}

// --- 2 ---------------------------------------------------------------------
Outcome d_closed_form() {
  bool ok = true;
  std::string worst;
  for (long n = 1; n <= 5; ++n) {
    const DInfinite d = d_infinite(n, 1000000);
    const double ref = 1.0 / (std::sqrt(2.0) * std::sinh(kPi * static_cast<double>(n)));
    const double rel = std::fabs(d.partial - ref) / ref;
    if (rel >= 1e-5) ok = false;
    worst += fmt(" n=%ld:%.2e", n, rel);
  }
  double diag_err = 0.0;
  for (std::size_t N = 1; N <= 8; ++N) {
    const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::infinite());
    const RealVector rates = rate_values(HeatRates{N}, fam.precision_bits);
    for (std::size_t n = 1; n <= N; ++n) {
      const double dist = cauchy_distance(rates, static_cast<long>(n)).to_double();
      const double product = 1.0 / (dist * dist);
      diag_err = std::max(diag_err, std::fabs(fam.coeff(n - 1, n - 1).to_double() / product - 1.0));
      if (N == 8) {
        diag_err = std::max(diag_err,
                            std::fabs(fam.coeff(n - 1, n - 1).to_double() / oracle::kGramInvDiagN8Inf[n - 1] - 1.0));
      }
    }
  }
  ok = ok && diag_err < 1e-15;
  return {ok, "partial product (K=1e6) relative error vs 1/(sqrt2 sinh(pi n)), tol 1e-5:" + worst +
                  fmt("; T=inf Gram inverse diagonal vs product, N<=8: %.2e (tol 1e-15)", diag_err)};
}

// --- 3 ---------------------------------------------------------------------
Outcome null_control() {
  const std::size_t N = 12, N_check = 100;
  const NoiseProfile prof = decay_profile(N_check);
  const StateVector z0({1.0, 1.0, 1.0});
  const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::finite(1.0));
  const ControlSignal h = synthesize(z0.resized(N), prof, 1.0, N, fam);
  const NullReport r = verify_null(z0, prof, h, 1.0, N_check);
  double controlled = 0.0;
  for (std::size_t i = 0; i < N; ++i) controlled = std::max(controlled, std::fabs(r.residuals[i]));
  const bool ok = controlled < 1e-15 && r.tail_l2 < 1e-30;
  return {ok, fmt("max residual n<=12 = %.3e (tol 1e-15); L2 tail 12<n<=100 = %.3e (tol 1e-30); ||h|| = %.6g",
                  controlled, r.tail_l2, h.norm())};
}

// --- 4 ---------------------------------------------------------------------
Outcome degenerate() {
  const std::size_t N = 12;
  const NoiseProfile base = decay_profile(N);
  std::vector<double> f(base.coeffs().begin(), base.coeffs().end());
  f[1] = 0.0;
  const NoiseProfile prof(f, 0.0);
  const StateVector z0 = StateVector::unit(2, N);
  const auto raises = [](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::DegenerateMode && e.mode() == 2;
    }
    return false;
  };
  const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::finite(1.0));
  int raised = 0, paths = 0;
  raised += raises([&] { moment_targets(z0, prof, 1.0, N); }), ++paths;
  raised += raises([&] { synthesize(z0, prof, 1.0, N, fam); }), ++paths;
  raised += raises([&] { norm_bound_sweep(prof, 0.01, 1.0, N, 4, 1, fam); }), ++paths;
  raised += raises([&] { bel_gradient(tanh_coordinate(1), StateVector::zeros(N), z0, prof, sampler(N, 1.0, 16, 1)); }),
      ++paths;
  {
    app::RunConfig c;
    c.command = "synth";
    c.params = {{"N", N}, {"T", 1.0}, {"z0", "e2"}};
    c.profile = {{"kind", "explicit"}, {"coeffs", f}, {"s", 0.0}};
    c.output_dir = fs::temp_directory_path() / "heatmoment_acceptance_c4";
    raised += app::run(c).exit_code == app::kDegenerate, ++paths;
  }
  const NullReport r = verify_null(z0, prof, ControlSignal::zero(1.0, N), 1.0, N);
  const double expected = oracle::kExpMinus4Pi2;
  const bool exact = r.residuals[1] == expected;
  return {raised == paths && exact, fmt("%d/%d synthesis paths raise DegenerateMode(2); h=0 residual[2] = %.17g, "
                                        "exp(-4 pi^2) = %.17g",
                                        raised, paths, r.residuals[1], expected)};
}

// --- 5 ---------------------------------------------------------------------
Outcome covariance() {
  const std::size_t N = 3, steps = 4096, samples = 100000;
  const double T = 1.0;
  const NoiseProfile prof = decay_profile(N);
  const StateVector x({1.0, 1.0, 1.0});
  const GaussianLaw law = transition_law(x, prof, T, N);
  const SampleMoments euler = sample_moments(euler_oracle(x, prof, T, steps, samples, 2024));
  const SampleMoments exact = sample_moments(sample(law, sampler(N, T, samples, 2025)));
  const Eigen::MatrixXd budget = euler_bias_budget(prof, T, steps, N);
  bool ok = true;
  double worst = 0.0;  // in units of the allowance
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double analytic = std::fabs(euler.cov(i, j) - law.cov(i, j));
      const double allow_a = 3.0 * euler.cov_stderr(i, j) + budget(i, j);
      const double sampled = std::fabs(euler.cov(i, j) - exact.cov(i, j));
      const double allow_s = 3.0 * std::hypot(euler.cov_stderr(i, j), exact.cov_stderr(i, j)) + budget(i, j);
      ok = ok && analytic <= allow_a && sampled <= allow_s;
      worst = std::max({worst, analytic / allow_a, sampled / allow_s});
    }
  }
  return {ok, fmt("Euler (4096 steps, 1e5 paths) vs exact covariance, N=3: worst |diff|/(3 se + budget) = %.3f, "
                  "max budget %.2e",
                  worst, budget.maxCoeff())};
}

// --- 6 ---------------------------------------------------------------------
Outcome bel_identity() {
  const std::size_t N = 4, samples = 100000;
  const double T = 0.1;
  const NoiseProfile prof = decay_profile(N);
  const StateVector x({0.3, 0.0, 0.0, 0.0});
  const StateVector y = StateVector::unit(1, N);
  const GradientEstimate bel = bel_gradient(tanh_coordinate(1), x, y, prof, sampler(N, T, samples, 61));
  const GradientEstimate fd = finite_difference_oracle(tanh_coordinate(1), x, y, prof, 1e-2, sampler(N, T, samples, 62));
  const double combined = std::hypot(bel.std_error, fd.std_error);
  const bool tanh_ok = std::fabs(bel.value - fd.value) <= 3.0 * combined + 1e-3;
  const GradientEstimate lin = bel_gradient(linear_coordinate(1), x, y, prof, sampler(N, T, samples, 63));
  const double target = std::exp(-kPi * kPi * T);
  const bool lin_ok = std::fabs(lin.value - target) <= 3.0 * lin.std_error;
  return {tanh_ok && lin_ok,
          fmt("tanh: BEL %.5f +- %.5f vs FD %.5f +- %.5f (|diff| %.2e, allowance %.2e); "
              "linear: BEL %.5f +- %.5f vs exp(-lambda_1 T) = %.6f",
              bel.value, bel.std_error, fd.value, fd.std_error, std::fabs(bel.value - fd.value),
              3.0 * combined + 1e-3, lin.value, lin.std_error, target)};
}

// --- 7 ---------------------------------------------------------------------
Outcome gradient_bound() {
  const std::size_t N = 4, samples = 100000;
  const double T = 0.1;
  const NoiseProfile prof = decay_profile(N);
  const std::vector<StateVector> xs = {StateVector::zeros(N), StateVector::unit(1, N).scaled(0.5),
                                       StateVector::unit(2, N)};
  const std::vector<StateVector> ys = {StateVector::unit(1, N), StateVector::unit(2, N),
                                       (StateVector::unit(1, N) + StateVector::unit(3, N)).normalized()};
  FellerOptions opts;
  opts.adapted_ridge = true;
  const FellerReport r = strong_feller_check(smooth_suite(), xs, ys, prof, sampler(N, T, samples, 71), opts);
  const BiorthogonalFamily fam = build_family(HeatRates{N}, Horizon::finite(T));
  const SweepReport sweep = norm_bound_sweep(prof, 0.01, T, N, 200, 72, fam);
  const double ratio = r.empirical_constant / sweep.max_ratio;
  std::size_t violations = 0;
  for (const FellerEntry& e : r.entries) violations += !e.ok;
  const bool ok = r.all_ok && ratio >= 0.5 && ratio <= 2.0;
  return {ok, fmt("%zu estimates, %zu above ||h_y|| + 3 se; empirical constant %.4g vs sweep max_ratio %.4g "
                  "(ratio %.3f, need [0.5, 2])",
                  r.entries.size(), violations, r.empirical_constant, sweep.max_ratio, ratio)};
}

// --- 8 ---------------------------------------------------------------------
Outcome delta_scan() {
  const double p = 1.0 / std::sqrt(2.0), alpha = 0.05;
  const std::size_t N = 1000;
  const NoiseProfile prof = delta_profile(p, N);
  bool nonzero = true, sandwich = true;
  for (long n = 1; n <= static_cast<long>(N); ++n) {
    nonzero = nonzero && std::fabs(prof.coeff(n)) > 0.0;
    sandwich = sandwich && sine_sandwich(p, n).holds;
  }
  const LowerBoundReport lb = verify_lower_bound(prof, 1.0, alpha, N);
  // Partial sums must be nondecreasing and settle: the increment after n = 10
  // is below the stated tail bound.
  double prev = 0.0;
  bool monotone = true;
  for (long n = 1; n <= static_cast<long>(N); ++n) {
    const double s = borel_cantelli_partial(alpha, n).partial_sum;
    monotone = monotone && s >= prev;
    prev = s;
  }
  const BorelCantelliSum at10 = borel_cantelli_partial(alpha, 10);
  const bool settles = prev - at10.partial_sum <= at10.tail_bound && std::isfinite(prev);
  const bool ok = nonzero && sandwich && lb.degenerate_modes.empty() && lb.best_C > 0.0 && monotone && settles;
  return {ok, fmt("p=1/sqrt2 N=1000: all nonzero %s, sandwich %s, best_C %.4g (log %.4g), "
                  "sum 4exp(-alpha pi^2 n^2) -> %.12g (tail after 10 <= %.2e)",
                  nonzero ? "yes" : "no", sandwich ? "yes" : "no", lb.best_C, lb.log_best_C, prev,
                  at10.tail_bound)};
}

// --- 9 ---------------------------------------------------------------------
std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "heatmoment_acceptance_c9";
  fs::remove_all(root);
  const Json decay = {{"kind", "gaussian_decay"}, {"alpha", 0.01}, {"C", 1.0}, {"N", 100}};
  struct Job {
    std::string command;
    Json params;
    Json profile;
  };
  const std::vector<Job> jobs = {
      {"biortho", {{"N", 10}, {"T", 1.0}}, nullptr},
      {"synth", {{"N", 12}, {"T", 1.0}, {"z0", "e1+e2+e3"}, {"N_check", 100}}, decay},
      {"simulate", {{"N", 3}, {"T", 1.0}, {"x", "e1+e2+e3"}, {"samples", 20000}, {"method", "euler"}, {"steps", 256},
                    {"dump_samples", 50}},
       decay},
      {"gradient", {{"N", 4}, {"T", 0.1}, {"x", "0.3,0,0,0"}, {"y", "e1"}, {"samples", 20000}, {"fd_eps", 0.01}},
       decay},
      {"delta-scan", {{"p", 1.0 / std::sqrt(2.0)}, {"alpha", 0.05}, {"N", 1000}}, nullptr},
  };
  std::size_t compared = 0;
  std::string mismatch;
  for (const Job& job : jobs) {
    app::RunConfig c;
    c.command = job.command;
    c.params = job.params;
    c.profile = job.profile;
    c.seed = 9;
    c.output_dir = root / (job.command + "_first");
    const app::RunResult first = app::run(c);
    if (first.exit_code != 0) return {false, job.command + " exited " + std::to_string(first.exit_code)};
    for (unsigned threads : {1u, 4u}) {
      app::RunConfig again = app::load_config(c.output_dir / "manifest.json");
      again.threads = threads;
      again.output_dir = root / (job.command + "_t" + std::to_string(threads));
      const app::RunResult second = app::run(again);
      if (second.artifacts != first.artifacts) mismatch += " " + job.command + ":artifact-list";
      for (const std::string& name : first.artifacts) {
        ++compared;
        if (slurp(c.output_dir / name) != slurp(again.output_dir / name)) mismatch += " " + job.command + "/" + name;
      }
    }
  }
  return {mismatch.empty(), fmt("%zu artifacts re-run from manifests at 1 and 4 threads, ", compared) +
                                (mismatch.empty() ? std::string("all bit-identical") : "differ:" + mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"biorthogonality", biorthogonality}, {"d_inf closed form", d_closed_form},
      {"null controllability", null_control}, {"degenerate obstruction", degenerate},
      {"covariance validation", covariance}, {"BEL identity", bel_identity},
      {"gradient bound", gradient_bound}, {"noise scan", delta_scan},
      {"determinism", determinism},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k + 1) != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
