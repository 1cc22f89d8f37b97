#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "heatmoment/errors.hpp"
#include "heatmoment/spde.hpp"
#include "oracles.hpp"

using namespace heatmoment;
constexpr double kPi = std::numbers::pi;

TEST(TransitionLaw, OneModeOrnsteinUhlenbeck) {
  const NoiseProfile prof({1.0}, 0.0);
  const GaussianLaw law = transition_law(StateVector({2.0}), prof, 1.0, 1);
  EXPECT_NEAR(law.cov(0, 0), oracle::kOuVarT1, 1e-17);
  EXPECT_NEAR(law.mean(0) / (2.0 * std::exp(-kPi * kPi)), 1.0, 1e-15);
}

TEST(TransitionLaw, ZeroNoiseIsDeterministic) {
  const NoiseProfile prof({0.0, 0.0, 0.0}, 0.0);
  const GaussianLaw law = transition_law(StateVector({1, 1, 1}), prof, 0.1, 3);
  EXPECT_EQ(law.cov.norm(), 0.0);
  SamplerConfig c;
  c.N = 3;
  c.T = 0.1;
  c.samples = 10;
  const Eigen::MatrixXd s = sample(law, c);
  for (Eigen::Index r = 0; r < s.rows(); ++r) EXPECT_EQ((s.row(r).transpose() - law.mean).norm(), 0.0);
}

TEST(TransitionLaw, SingleNoiseCorrelatesModes) {
  const NoiseProfile prof({1.0, -0.5}, 0.0);
  const GaussianLaw law = transition_law(StateVector::zeros(2), prof, 1.0, 2);
  EXPECT_LT(law.cov(0, 1), 0.0);
  EXPECT_NEAR((law.factor * law.factor.transpose() - law.cov).norm(), 0.0, 1e-16);
}

TEST(TransitionLaw, ChapmanKolmogorov) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 5);
  const StateVector x({0.3, -0.1, 0.7, 0.0, 0.2});
  const double t1 = 0.04, t2 = 0.07;
  const GaussianLaw a = transition_law(x, prof, t1, 5);
  const GaussianLaw b = transition_law(x, prof, t1 + t2, 5);
  const GaussianLaw c = transition_law(StateVector::zeros(5), prof, t2, 5);
  for (Eigen::Index n = 0; n < 5; ++n) {
    const double ln = eigenvalue(n + 1);
    EXPECT_NEAR(b.mean(n), std::exp(-ln * t2) * a.mean(n), 1e-15);
    for (Eigen::Index m = 0; m < 5; ++m) {
      const double lm = eigenvalue(m + 1);
      EXPECT_NEAR(b.cov(n, m), std::exp(-(ln + lm) * t2) * a.cov(n, m) + c.cov(n, m), 1e-12);
    }
  }
}

TEST(CovarianceFactor, JitterRepairAndRejection) {
  Eigen::MatrixXd rank_one(3, 3);
  const Eigen::Vector3d v(1.0, 2.0, -1.0);
  rank_one = v * v.transpose();
  rank_one(2, 2) -= 1e-15;  // tiny negative eigenvalue
  const Eigen::MatrixXd F = covariance_factor(rank_one);
  EXPECT_NEAR((F * F.transpose() - rank_one).norm(), 0.0, 1e-12);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = bad(1, 0) = 2.0;
  try {
    covariance_factor(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndefiniteCovariance);
  }
}

TEST(Sample, OneModeVarianceWithinOnePercent) {
  const NoiseProfile prof({1.0}, 0.0);
  const GaussianLaw law = transition_law(StateVector({0.0}), prof, 1.0, 1);
  SamplerConfig c;
  c.N = 1;
  c.T = 1.0;
  c.samples = 1000000;
  c.seed = 5;
  const SampleMoments m = sample_moments(sample(law, c));
  EXPECT_NEAR(m.cov(0, 0) / oracle::kOuVarT1, 1.0, 0.01);
}

TEST(Sample, DeterministicAcrossThreadCounts) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 4);
  const GaussianLaw law = transition_law(StateVector({1.0}), prof, 0.1, 4);
  SamplerConfig c;
  c.N = 4;
  c.T = 0.1;
  c.samples = 20000;
  c.seed = 77;
  c.block_size = 1000;
  const Eigen::MatrixXd a = sample(law, c);
  c.threads = 4;
  const Eigen::MatrixXd b = sample(law, c);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(EulerOracle, ZeroNoiseDecaysDeterministically) {
  const NoiseProfile prof({0.0, 0.0}, 0.0);
  const Eigen::MatrixXd s = euler_oracle(StateVector({1.0, 2.0}), prof, 0.1, 7, 3, 1);
  for (Eigen::Index r = 0; r < 3; ++r) {
    EXPECT_NEAR(s(r, 0), std::exp(-eigenvalue(1L) * 0.1), 1e-15);
    EXPECT_NEAR(s(r, 1), 2.0 * std::exp(-eigenvalue(2L) * 0.1), 1e-15);
  }
}

TEST(EulerOracle, AgreesWithExactLaw) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 3);
  const StateVector x({0.5, 0.0, -0.2});
  const double T = 0.1;
  const std::size_t steps = 512;
  const Eigen::MatrixXd s = euler_oracle(x, prof, T, steps, 50000, 3);
  const SampleMoments m = sample_moments(s);
  const GaussianLaw law = transition_law(x, prof, T, 3);
  const Eigen::MatrixXd budget = euler_bias_budget(prof, T, steps, 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LE(std::fabs(m.mean(i) - law.mean(i)), 4.0 * m.mean_stderr(i) + 1e-15);
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_LE(std::fabs(m.cov(i, j) - law.cov(i, j)), 4.0 * m.cov_stderr(i, j) + budget(i, j)) << i << j;
    }
  }
}

TEST(SemigroupExpectation, ConstantLinearAndIndicator) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 3);
  const StateVector x({0.8, 0.1, 0.0});
  SamplerConfig c;
  c.N = 3;
  c.T = 0.1;
  c.samples = 100000;
  c.seed = 12;
  const McEstimate one = semigroup_expectation(constant_observable(1.0), x, prof, 0.1, c);
  EXPECT_EQ(one.value, 1.0);
  EXPECT_EQ(one.std_error, 0.0);

  const McEstimate lin = semigroup_expectation(linear_coordinate(1), x, prof, 0.1, c);
  const double mean1 = std::exp(-eigenvalue(1L) * 0.1) * 0.8;
  EXPECT_LE(std::fabs(lin.value - mean1), 3.0 * lin.std_error);

  const GaussianLaw law = transition_law(x, prof, 0.1, 3);
  const double threshold = 0.3;
  const double tail = 1.0 - oracle::normal_cdf((threshold - law.mean(0)) / std::sqrt(law.cov(0, 0)));
  const McEstimate ind = semigroup_expectation(indicator_coordinate(1, threshold), x, prof, 0.1, c);
  EXPECT_LE(std::fabs(ind.value - tail), 3.0 * ind.std_error);
  EXPECT_LE(std::fabs(ind.value), 1.0);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  c.samples = 0;
  EXPECT_THROW(c.validate(), Error);
  c.samples = 1;
  c.method = ExponentialEuler{0};
  EXPECT_THROW(c.validate(), Error);
}
