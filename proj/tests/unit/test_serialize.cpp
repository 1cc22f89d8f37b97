#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "heatmoment/errors.hpp"
#include "heatmoment/serialize.hpp"

using namespace heatmoment;

namespace {

void expect_config_error(const std::function<void()>& f, const std::string& field) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    ASSERT_TRUE(e.field().has_value());
    EXPECT_NE(e.field()->find(field), std::string::npos) << *e.field();
  }
}

}  // namespace

TEST(Serialize, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::exp(-9.8696044010893586)}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Serialize, StateVector) {
  const StateVector x({0.1, -2.0, 1e-20});
  const StateVector y = state_from_json(to_json(x));
  ASSERT_EQ(y.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x[i], y[i]);
}

TEST(Serialize, Profiles) {
  for (const NoiseProfile& p : {gaussian_decay_profile(0.05, 1.5, 6), delta_profile(0.7071067811865476, 5),
                                NoiseProfile({1.0, 0.0, -0.25}, 0.0)}) {
    const NoiseProfile q = profile_from_json(to_json(p));
    ASSERT_EQ(q.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(q.coeffs()[i], p.coeffs()[i]);
    EXPECT_EQ(q.s(), p.s());
  }
}

TEST(Serialize, FamilyIsExact) {
  const BiorthogonalFamily f = build_family(HeatRates{6}, Horizon::finite(0.5));
  const BiorthogonalFamily g = family_from_json(to_json(f));
  EXPECT_EQ(g.precision_bits, f.precision_bits);
  EXPECT_EQ(g.horizon(), f.horizon());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) EXPECT_TRUE(g.coeff(i, j) == f.coeff(i, j));
  EXPECT_EQ(to_json(g).dump(), to_json(f).dump());
}

TEST(Serialize, InfiniteHorizonFamily) {
  const BiorthogonalFamily f = build_family(HeatRates{4}, Horizon::infinite());
  EXPECT_TRUE(family_from_json(to_json(f)).horizon().is_infinite());
}

TEST(Serialize, Control) {
  const NoiseProfile prof = gaussian_decay_profile(0.01, 1.0, 3);
  const BiorthogonalFamily fam = build_family(HeatRates{3}, Horizon::finite(1.0));
  const ControlSignal h = synthesize(StateVector({1, 1, 1}), prof, 1.0, 3, fam);
  const ControlSignal k = control_from_json(to_json(h));
  EXPECT_EQ(k.T, h.T);
  EXPECT_EQ(k.norm(), h.norm());
  for (double t : {0.0, 0.3, 1.0}) EXPECT_EQ(k.evaluate(t), h.evaluate(t));
}

TEST(Serialize, Reports) {
  NullReport r;
  r.residuals = {1e-40, 2e-18};
  r.tail_bounds = {0.0, 3e-18};
  r.controlled_l2 = 1e-40;
  r.tail_l2 = 2e-18;
  r.l2_residual = 2e-18;
  r.controlled_modes = 1;
  const NullReport s = null_report_from_json(to_json(r));
  EXPECT_EQ(s.residuals, r.residuals);
  EXPECT_EQ(s.tail_bounds, r.tail_bounds);
  EXPECT_EQ(s.controlled_modes, 1u);

  SweepReport w;
  w.max_ratio = 7.1;
  w.trials = 200;
  w.seed = 42;
  const SweepReport v = sweep_report_from_json(to_json(w));
  EXPECT_EQ(v.max_ratio, 7.1);
  EXPECT_EQ(v.seed, 42u);

  GradientEstimate g{0.36, 0.005, 1000, 7.9};
  const GradientEstimate h = gradient_from_json(to_json(g));
  EXPECT_EQ(h.value, g.value);
  EXPECT_EQ(h.std_error, g.std_error);
  EXPECT_EQ(h.control_norm, g.control_norm);
  EXPECT_TRUE(to_json(g).contains("stderr"));

  const McEstimate m = mc_estimate_from_json(to_json(McEstimate{1.5, 0.25, 10}));
  EXPECT_EQ(m.samples, 10u);
}

TEST(Serialize, MatrixRoundTrip) {
  Eigen::MatrixXd a(2, 3);
  a << 1, 2, 3, 4.5, -1e-30, 0.1;
  EXPECT_EQ(matrix_from_json(to_json(a)), a);
  Eigen::VectorXd v(2);
  v << 0.1, 0.2;
  EXPECT_EQ(vector_from_json(to_json(v)), v);
}

TEST(Serialize, BadInputNamesField) {
  expect_config_error([] { profile_from_json(Json::object()); }, "profile");
  expect_config_error([] { profile_from_json(Json{{"p", 0.5}}); }, "kind");
  expect_config_error([] { profile_from_json(Json{{"kind", "dirac"}, {"N", 4}}); }, "p");
  expect_config_error([] { profile_from_json(Json{{"kind", "rainbow"}}); }, "kind");
  expect_config_error([] { state_from_json(Json("x")); }, "");
  expect_config_error([] { control_from_json(Json{{"T", 1.0}}); }, "");
}
