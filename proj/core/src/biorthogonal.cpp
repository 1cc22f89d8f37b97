#include "heatmoment/biorthogonal.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "heatmoment/errors.hpp"
#include "heatmoment/spectral.hpp"

namespace heatmoment {

// ---------------------------------------------------------------------------
// Horizon

Horizon Horizon::finite(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive and finite")
        .with_field("T");
  }
  return Horizon(T, false);
}

double Horizon::value() const {
  if (infinite_) throw Error(ErrorKind::InvalidArgument, "infinite horizon has no finite value");
  return T_;
}

std::string Horizon::str() const {
  if (infinite_) return "inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, T_);
  return std::string(buf, res.ptr);
}

Horizon Horizon::parse(const std::string& text) {
  if (text == "inf" || text == "infinity") return infinite();
  double T = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), T);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, "cannot parse horizon '" + text + "'").with_field("T");
  }
  return finite(T);
}

// ---------------------------------------------------------------------------
// Rates and Gram matrix

std::size_t rate_count(const RateSpec& spec) noexcept {
  if (const auto* h = std::get_if<HeatRates>(&spec)) return h->N;
  return std::get<ExplicitRates>(spec).values.size();
}

bool is_heat_rates(const RateSpec& spec) noexcept { return std::holds_alternative<HeatRates>(spec); }

RealVector rate_values(const RateSpec& spec, long bits) {
  RealVector out;
  if (const auto* h = std::get_if<HeatRates>(&spec)) {
    const Real pi = Real::pi(bits);
    const Real pi2 = pi * pi;
    out.reserve(h->N);
    for (std::size_t n = 1; n <= h->N; ++n) {
      const long sq = static_cast<long>(n * n);
      out.push_back(pi2 * Real(sq, bits));
    }
  } else {
    for (double v : std::get<ExplicitRates>(spec).values) out.emplace_back(v, bits);
  }
  return out;
}

Real exponential_inner_product(const Real& a, const Real& b, const Horizon& horizon) {
  const Real sum = a + b;
  if (horizon.is_infinite()) return Real(1L, sum.precision()) / sum;
  const Real T(horizon.value(), sum.precision());
  // (1 - exp(-sum T)) / sum, with expm1 keeping small sum*T accurate.
  return -expm1(-(sum * T)) / sum;
}

GramMatrix gram_matrix(const RateSpec& spec, const Horizon& horizon, long precision_bits) {
  if (precision_bits < 53) {
    throw Error(ErrorKind::InvalidArgument, "precision_bits must be at least 53");
  }
  const std::size_t N = rate_count(spec);
  if (N == 0) throw Error(ErrorKind::InvalidArgument, "at least one rate is required");
  if (const auto* e = std::get_if<ExplicitRates>(&spec)) {
    for (std::size_t i = 0; i < N; ++i) {
      const double v = e->values[i];
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::InvalidArgument, "rates must be positive and finite");
      }
      if (i > 0 && v == e->values[i - 1]) {
        throw Error(ErrorKind::SingularGram,
                    "duplicate rate at positions " + std::to_string(i) + " and " +
                        std::to_string(i + 1))
            .with_mode(static_cast<long>(i + 1));
      }
      if (i > 0 && v < e->values[i - 1]) {
        throw Error(ErrorKind::InvalidArgument, "rates must be strictly increasing");
      }
    }
  }

  GramMatrix g;
  g.spec = spec;
  g.horizon = horizon;
  g.precision_bits = precision_bits;
  g.rates = rate_values(spec, precision_bits);
  g.entries = RealMatrix(N, N, precision_bits);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      Real v = exponential_inner_product(g.rates[j], g.rates[k], horizon);
      g.entries(k, j) = v;
      g.entries(j, k) = std::move(v);
    }
  }
  return g;
}

long PrecisionPolicy::start_bits(std::size_t N) const noexcept {
  if (initial_bits > 0) return initial_bits;
  return std::max<long>(128, 8 * static_cast<long>(N) + 64);
}

Real biorthogonality_defect(const GramMatrix& gram, const RealMatrix& coeff) {
  const RealMatrix product = multiply(gram.entries, coeff);
  const long bits = product.precision();
  Real worst(0L, bits);
  const Real one(1L, bits);
  for (std::size_t i = 0; i < product.rows(); ++i) {
    for (std::size_t j = 0; j < product.cols(); ++j) {
      const Real d = abs(i == j ? product(i, j) - one : product(i, j));
      if (d > worst) worst = d;
    }
  }
  return worst;
}

BiorthogonalFamily construct(const GramMatrix& gram, const PrecisionPolicy& policy) {
  const std::size_t N = gram.size();
  long bits = gram.precision_bits;
  double last_residual = std::numeric_limits<double>::infinity();
  std::vector<long> attempts;
  GramMatrix current = gram;

  while (true) {
    attempts.push_back(bits);
    if (current.precision_bits != bits) current = gram_matrix(gram.spec, gram.horizon, bits);
    RealMatrix lower;
    if (cholesky(current.entries, lower)) {
      RealMatrix inv = cholesky_inverse(lower);
      Real residual = biorthogonality_defect(current, inv);
      last_residual = residual.to_double();
      if (last_residual < policy.tolerance) {
        BiorthogonalFamily family{std::move(current), std::move(inv), std::move(lower),
                                  std::move(residual), bits, std::move(attempts)};
        return family;
      }
    }
    if (bits >= policy.cap_bits) break;
    bits = std::min(bits * 2, policy.cap_bits);
  }

  std::ostringstream msg;
  msg << "biorthogonal family for N=" << N << " did not reach residual " << policy.tolerance
      << " within " << policy.cap_bits << " bits (last residual " << last_residual << ")";
  throw Error(ErrorKind::PrecisionExhausted, msg.str()).with_achieved(last_residual);
}

GramMatrix gram_with_factor(const RateSpec& spec, const Horizon& horizon, long start_bits,
                            RealMatrix& factor, long cap_bits) {
  for (long bits = start_bits;; bits = std::min(bits * 2, cap_bits)) {
    GramMatrix g = gram_matrix(spec, horizon, bits);
    if (cholesky(g.entries, factor)) return g;
    if (bits >= cap_bits) break;
  }
  throw Error(ErrorKind::PrecisionExhausted, "Gram matrix not positive definite within the precision cap");
}

BiorthogonalFamily build_family(const RateSpec& spec, const Horizon& horizon,
                                const PrecisionPolicy& policy) {
  return construct(gram_matrix(spec, horizon, policy.start_bits(rate_count(spec))), policy);
}

namespace {

std::size_t checked_index(const BiorthogonalFamily& family, long n) {
  if (n < 1 || static_cast<std::size_t>(n) > family.size()) {
    throw Error(ErrorKind::InvalidMode,
                "mode " + std::to_string(n) + " outside family of size " +
                    std::to_string(family.size()))
        .with_mode(n);
  }
  return static_cast<std::size_t>(n - 1);
}

}  // namespace

Real d_finite_real(const BiorthogonalFamily& family, long n) {
  const std::size_t i = checked_index(family, n);
  return Real(1L, family.precision_bits) / sqrt(family.coeff(i, i));
}

double d_finite(const BiorthogonalFamily& family, long n) { return d_finite_real(family, n).to_double(); }

Real cauchy_distance(const RealVector& rates, long n) {
  if (n < 1 || static_cast<std::size_t>(n) > rates.size()) {
    throw Error(ErrorKind::InvalidMode, "mode outside rate list").with_mode(n);
  }
  const std::size_t i = static_cast<std::size_t>(n - 1);
  const long bits = rates[i].precision();
  Real out = Real(1L, bits) / sqrt(Real(2L, bits) * rates[i]);
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (k == i) continue;
    out *= abs((rates[k] - rates[i]) / (rates[k] + rates[i]));
  }
  return out;
}

DInfinite d_infinite(long n, long K) {
  const ModeIndex mode(n);
  if (K < n) throw Error(ErrorKind::InvalidArgument, "product truncation K must be >= n");
  const double dn = static_cast<double>(mode.value());
  const double n2 = dn * dn;
  // log prod |(k^2 - n^2)/(k^2 + n^2)| as a Neumaier-compensated sum of
  // log1p(-2 min(k,n)^2 / (k^2 + n^2)).
  double sum = 0.0;
  double comp = 0.0;
  for (long k = 1; k <= K; ++k) {
    if (k == n) continue;
    const double dk = static_cast<double>(k);
    const double m = std::min(dk, dn);
    const double term = std::log1p(-2.0 * m * m / (dk * dk + n2));
    const double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  sum += comp;
  constexpr double pi = std::numbers::pi;
  DInfinite out;
  out.partial = std::exp(sum) / (std::numbers::sqrt2 * pi * dn);
  // 1/(sqrt(2) sinh(x)) = sqrt(2) e^{-x} / (1 - e^{-2x})
  const double x = pi * dn;
  out.limit = std::numbers::sqrt2 * std::exp(-x) / (-std::expm1(-2.0 * x));
  out.gap = out.partial - out.limit;
  out.relative_gap = out.gap / out.limit;
  return out;
}

ThetaNormReport theta_norm_bound_check(const BiorthogonalFamily& family, long n) {
  const std::size_t i = checked_index(family, n);
  const long bits = family.precision_bits;
  const Real norm = sqrt(family.coeff(i, i));
  const Real x = Real::pi(bits) * Real(n, bits);
  const Real bound = sqrt(Real(2L, bits)) * sinh(x);
  const Real finite_bound = Real(1L, bits) / cauchy_distance(family.gram.rates, n);
  ThetaNormReport r;
  r.norm = norm.to_double();
  r.bound = bound.to_double();
  r.ratio = (norm / bound).to_double();
  r.finite_bound = finite_bound.to_double();
  r.finite_ratio = (norm / finite_bound).to_double();
  return r;
}

Real evaluate_theta_real(const BiorthogonalFamily& family, long n, const Real& t) {
  const std::size_t m = checked_index(family, n);
  const long bits = family.precision_bits;
  Real acc(0L, bits);
  for (std::size_t j = 0; j < family.size(); ++j) {
    acc += family.coeff(j, m) * exp(-(family.gram.rates[j] * t));
  }
  return acc;
}

double evaluate_theta(const BiorthogonalFamily& family, long n, double t) {
  const bool inside = t >= 0.0 && (family.horizon().is_infinite() || t <= family.horizon().value());
  if (!inside) {
    throw Error(ErrorKind::OutOfDomain,
                "theta is defined on [0, " + family.horizon().str() + "]; got t=" + std::to_string(t));
  }
  return evaluate_theta_real(family, n, Real(t, family.precision_bits)).to_double();
}

}  // namespace heatmoment
