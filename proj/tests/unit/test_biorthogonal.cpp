#include <cmath>
#include <vector>
#include <numbers>

#include <gtest/gtest.h>

#include "heatmoment/biorthogonal.hpp"
#include "heatmoment/errors.hpp"
#include "oracles.hpp"

using namespace heatmoment;
constexpr double kPi = std::numbers::pi;

TEST(Horizon, ParseAndPrint) {
  EXPECT_TRUE(Horizon::parse("inf").is_infinite());
  EXPECT_EQ(Horizon::parse("0.1").value(), 0.1);
  EXPECT_EQ(Horizon::finite(0.1).str(), "0.1");
  EXPECT_EQ(Horizon::infinite().str(), "inf");
  EXPECT_THROW(Horizon::finite(-1.0), Error);
}

TEST(Gram, EntriesMatchDirectIntegration) {
  const GramMatrix g = gram_matrix(HeatRates{4}, Horizon::finite(1.0), 128);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double lj = kPi * kPi * double((j + 1) * (j + 1));
      const double lk = kPi * kPi * double((k + 1) * (k + 1));
      const double direct = oracle::simpson([&](double t) { return std::exp(-(lj + lk) * t); }, 0, 1, 200000);
      EXPECT_NEAR(g.entries(j, k).to_double(), direct, 1e-12);
    }
  }
}

TEST(Gram, RejectsBadRates) {
  try {
    gram_matrix(ExplicitRates{{1.0, 2.0, 2.0}}, Horizon::finite(1.0), 128);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularGram);
  }
  EXPECT_THROW(gram_matrix(ExplicitRates{{2.0, 1.0}}, Horizon::finite(1.0), 128), Error);
  EXPECT_THROW(gram_matrix(ExplicitRates{{-1.0, 1.0}}, Horizon::finite(1.0), 128), Error);
  EXPECT_THROW(gram_matrix(HeatRates{3}, Horizon::finite(1.0), 40), Error);
}

TEST(Family, InverseDiagonalMatchesFrozenValues) {
  const BiorthogonalFamily f3 = build_family(HeatRates{3}, Horizon::finite(1.0));
  const BiorthogonalFamily f4 = build_family(HeatRates{4}, Horizon::finite(1.0));
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(f3.coeff(i, i).to_double() / oracle::kGramInvDiagN3T1[i], 1.0, 1e-15);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_NEAR(f4.coeff(i, i).to_double() / oracle::kGramInvDiagN4T1[i], 1.0, 1e-15);
}

TEST(Family, BiorthogonalityByQuadrature) {
  const BiorthogonalFamily f = build_family(HeatRates{4}, Horizon::finite(1.0));
  const std::size_t intervals = 400000;
  const double h = 1.0 / double(intervals);
  for (long m = 1; m <= 4; ++m) {
    // theta_m has cancellation of O(1e4) terms; 1e-9 is what double-valued
    // sampling of it can deliver. Sample once, reuse for every n.
    std::vector<double> theta(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) theta[k] = evaluate_theta(f, m, k == intervals ? 1.0 : double(k) * h);
    for (long n = 1; n <= 4; ++n) {
      const double lam = kPi * kPi * double(n * n);
      const double v = oracle::simpson(
          [&](double t) {
            const auto k = static_cast<std::size_t>(std::lround(t / h));
            return std::exp(-lam * t) * theta[k];
          },
          0, 1, intervals);
      EXPECT_NEAR(v, n == m ? 1.0 : 0.0, 1e-7) << n << "," << m;
    }
  }
}

TEST(Family, PrecisionEscalatesAndRecordsAttempts) {
  PrecisionPolicy policy;
  policy.initial_bits = 53;
  const BiorthogonalFamily f = build_family(HeatRates{10}, Horizon::finite(1.0), policy);
  EXPECT_GT(f.attempts.size(), 1u);
  EXPECT_EQ(f.attempts.front(), 53);
  EXPECT_EQ(f.attempts.back(), f.precision_bits);
  EXPECT_LT(f.residual.to_double(), 1e-20);
  EXPECT_LT(biorthogonality_defect(f.gram, f.coeff).to_double(), 1e-20);
}

TEST(Family, PrecisionExhaustedCarriesResidual) {
  PrecisionPolicy policy;
  policy.initial_bits = 64;
  policy.cap_bits = 64;
  try {
    build_family(HeatRates{12}, Horizon::finite(1.0), policy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PrecisionExhausted);
    ASSERT_TRUE(e.achieved().has_value());
  }
}

TEST(Family, InfiniteHorizonMatchesCauchyProduct) {
  const BiorthogonalFamily f = build_family(HeatRates{8}, Horizon::infinite());
  for (long n = 1; n <= 8; ++n) {
    const double d = d_finite(f, n);
    const double product = cauchy_distance(f.gram.rates, n).to_double();
    EXPECT_NEAR(d / product, 1.0, 1e-15) << n;
    EXPECT_NEAR(f.coeff(n - 1, n - 1).to_double() / oracle::kGramInvDiagN8Inf[n - 1], 1.0, 1e-15);
  }
}

TEST(DInfinite, ClosedFormLimitAndMonotoneGap) {
  for (long n = 1; n <= 5; ++n) {
    const DInfinite a = d_infinite(n, 1000);
    const DInfinite b = d_infinite(n, 100000);
    EXPECT_NEAR(a.limit, 1.0 / (std::sqrt(2.0) * std::sinh(kPi * double(n))), 1e-15 * a.limit);
    EXPECT_GE(a.gap, 0.0);
    EXPECT_LT(b.gap, a.gap);
    // Truncating the product after K factors leaves a relative excess of about 2 n^2 / K.
    EXPECT_NEAR(b.relative_gap, 2.0 * double(n * n) / 1e5, 0.05 * 2.0 * double(n * n) / 1e5);
  }
}

TEST(ThetaNorm, FiniteRatioAtLeastOne) {
  const BiorthogonalFamily f = build_family(HeatRates{12}, Horizon::finite(1.0));
  for (long n = 1; n <= 12; ++n) {
    const ThetaNormReport r = theta_norm_bound_check(f, n);
    EXPECT_GE(r.finite_ratio, 1.0 - 1e-12) << n;
    EXPECT_NEAR(r.bound, std::sqrt(2.0) * std::sinh(kPi * double(n)), 1e-12 * r.bound);
  }
}

TEST(ThetaNorm, InfiniteHorizonRatioTendsToOneForLowModes) {
  const BiorthogonalFamily f = build_family(HeatRates{40}, Horizon::infinite());
  const ThetaNormReport r = theta_norm_bound_check(f, 1);
  // The missing factors k > 40 make the finite family's theta_1 shorter by ~2/40.
  EXPECT_GT(r.ratio, 0.9);
  EXPECT_LE(r.ratio, 1.0);
}

TEST(Family, OutOfRangeMode) {
  const BiorthogonalFamily f = build_family(HeatRates{3}, Horizon::finite(1.0));
  EXPECT_THROW(d_finite(f, 4), Error);
  EXPECT_THROW(evaluate_theta(f, 1, 1.5), Error);
}
