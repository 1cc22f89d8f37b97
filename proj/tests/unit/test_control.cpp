#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "heatmoment/control.hpp"
#include "heatmoment/errors.hpp"
#include "oracles.hpp"

using namespace heatmoment;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent integrator for z_n' = -lambda_n z_n + f_n h(t): exact decay
// factor plus Simpson on the forcing integral.
double integrate_mode(double z0, double f, long n, const ControlSignal& h, double T) {
  const double lam = kPi * kPi * double(n * n);
  const double forcing = oracle::simpson([&](double s) { return std::exp(-lam * (T - s)) * h.evaluate(s); }, 0.0, T,
                                         200000);
  return std::exp(-lam * T) * z0 + f * forcing;
}

}  // namespace

TEST(Synthesize, MatchesFrozenWeights) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 12);
  const BiorthogonalFamily fam = build_family(HeatRates{12}, Horizon::finite(1.0));
  const ControlSignal h = synthesize(StateVector({1, 1, 1}).resized(12), prof, 1.0, 12, fam);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(h.weights[i].to_double() / oracle::kControlW123[i], 1.0, 1e-14);
  EXPECT_NEAR(h.norm() / oracle::kControlNorm, 1.0, 1e-14);
  EXPECT_LT(h.moment_defect, 1e-30);
}

TEST(Synthesize, ResidualsAgreeWithIndependentIntegration) {
  const NoiseProfile prof = gaussian_decay_profile(0.05, 1.0, 6);
  const BiorthogonalFamily fam = build_family(HeatRates{3}, Horizon::finite(0.5));
  const StateVector z0({0.4, -1.0, 0.3});
  const ControlSignal h = synthesize(z0, prof, 0.5, 3, fam);
  const NullReport r = verify_null(z0, prof, h, 0.5, 6);
  for (long n = 1; n <= 6; ++n) {
    const double oracle_value = integrate_mode(z0.mode(n), prof.coeff(n), n, h, 0.5);
    EXPECT_NEAR(r.residuals[n - 1], oracle_value, 1e-9 * (1.0 + std::fabs(oracle_value))) << n;
  }
  EXPECT_LT(r.controlled_l2, 1e-25);
  for (long n = 1; n <= 6; ++n) EXPECT_LE(std::fabs(r.residuals[n - 1]), r.tail_bounds[n - 1]);
}

TEST(Synthesize, ZeroStateGivesZeroControl) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const BiorthogonalFamily fam = build_family(HeatRates{4}, Horizon::finite(1.0));
  const ControlSignal h = synthesize(StateVector::zeros(4), prof, 1.0, 4, fam);
  EXPECT_EQ(h.norm(), 0.0);
}

TEST(Synthesize, NormIsLinearInTheState) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const BiorthogonalFamily fam = build_family(HeatRates{4}, Horizon::finite(1.0));
  const StateVector z({0.2, 0.1, -0.3, 0.05});
  const double a = synthesize(z, prof, 1.0, 4, fam).norm();
  const double b = synthesize(z.scaled(-3.0), prof, 1.0, 4, fam).norm();
  EXPECT_NEAR(b, 3.0 * a, 1e-14 * b);
}

TEST(Synthesize, NormSquaredEqualsQuadratureOfH) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const BiorthogonalFamily fam = build_family(HeatRates{4}, Horizon::finite(0.1));
  const ControlSignal h = synthesize(StateVector({1.0}).resized(4), prof, 0.1, 4, fam);
  const double quad = oracle::simpson([&](double t) { return h.evaluate(t) * h.evaluate(t); }, 0, 0.1, 200000);
  EXPECT_NEAR(h.norm() * h.norm(), quad, 1e-8 * quad);
  EXPECT_NEAR(h.norm(), oracle::kHNormE1, 1e-12);
}

TEST(Synthesize, DegenerateModeRefused) {
  const NoiseProfile prof({1.0, 0.0, 1.0}, 0.0);
  const BiorthogonalFamily fam = build_family(HeatRates{3}, Horizon::finite(1.0));
  try {
    synthesize(StateVector::unit(2, 3), prof, 1.0, 3, fam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMode);
    EXPECT_EQ(e.mode(), 2);
  }
  // Even a state that does not touch mode 2 is refused: the moment system needs every f_n.
  EXPECT_THROW(synthesize(StateVector::unit(1, 3), prof, 1.0, 3, fam), Error);
}

TEST(Synthesize, HorizonAndShapeChecks) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const BiorthogonalFamily fam = build_family(HeatRates{4}, Horizon::finite(1.0));
  try {
    synthesize(StateVector::unit(1, 4), prof, 0.5, 4, fam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HorizonMismatch);
  }
  EXPECT_THROW(synthesize(StateVector::unit(1, 3), prof, 1.0, 3, fam), Error);
}

TEST(VerifyNull, ZeroControlGivesFreeDecayExactly) {
  const NoiseProfile prof({1.0, 0.0, 1.0}, 0.0);
  const ControlSignal zero = ControlSignal::zero(1.0, 3);
  const NullReport r = verify_null(StateVector::unit(2, 3), prof, zero, 1.0, 3);
  EXPECT_EQ(r.residuals[1], oracle::kExpMinus4Pi2);
  EXPECT_EQ(r.residuals[0], 0.0);
}

TEST(Trajectory, EndpointMatchesVerifyNullBitForBit) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 8);
  const BiorthogonalFamily fam = build_family(HeatRates{8}, Horizon::finite(1.0));
  const StateVector z0 = StateVector({1, 1, 1}).resized(8);
  const ControlSignal h = synthesize(z0, prof, 1.0, 8, fam);
  const auto traj = solve_trajectory(z0, prof, h, {0.0, 0.25, 1.0});
  const NullReport r = verify_null(z0, prof, h, 1.0, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(traj.back()[i], r.residuals[i]);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(traj.front()[i], z0[i]);
  EXPECT_THROW(solve_trajectory(z0, prof, h, {0.0, 1.5}), Error);
}

TEST(Trajectory, PropagationComposes) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const BiorthogonalFamily fam = build_family(HeatRates{4}, Horizon::finite(1.0));
  const StateVector z0({0.5, -0.2, 0.1, 0.0});
  const ControlSignal h = synthesize(z0, prof, 1.0, 4, fam);
  const StateVector mid = propagate(z0, 0.0, 0.3, prof, h);
  const StateVector two_step = propagate(mid, 0.3, 0.8, prof, h);
  const StateVector one_step = propagate(z0, 0.0, 0.8, prof, h);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(two_step[i], one_step[i], 1e-13 * (1 + std::fabs(one_step[i])));
}

TEST(Sweep, DeterministicAndBoundedByOperatorNorm) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const SweepReport a = norm_bound_sweep(prof, 0.01, 0.1, 4, 50, 9, 1);
  const SweepReport b = norm_bound_sweep(prof, 0.01, 0.1, 4, 50, 9, 3);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_EQ(a.trial_max, b.trial_max);
  EXPECT_FALSE(a.outside_regime);
  EXPECT_GE(a.max_ratio, a.probe_ratio);
  // The largest ||h|| / ||z0|| is the top singular value of the control map, 7.506.
  EXPECT_LT(a.max_ratio, 7.51);
  EXPECT_TRUE(norm_bound_sweep(prof, 0.5, 0.1, 4, 2, 1).outside_regime);
}
