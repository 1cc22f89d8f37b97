#pragma once

// Biorthogonal family to {exp(-lambda_n t)} in L^2(0,T), obtained by
// inverting the Gram matrix of the exponentials in extended precision.
//
// The Gram matrix G_jk = (1 - exp(-(lambda_j + lambda_k) T)) / (lambda_j + lambda_k)
// is a (truncated) Cauchy matrix and its inverse diagonal grows like
// sinh^2(pi n); for N = 12 roughly 33 decimal digits go to conditioning
// alone. Construction therefore starts at max(128, 8N + 64) bits and doubles
// the precision until max |G C - I| < 1e-20, giving up at 8192 bits.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "heatmoment/real.hpp"
#include "heatmoment/real_matrix.hpp"

namespace heatmoment {

class Horizon {
 public:
  static Horizon finite(double T);
  static Horizon infinite() { return Horizon(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  // Throws InvalidArgument for the infinite horizon.
  double value() const;
  // "inf" or the shortest round-trip decimal of T.
  std::string str() const;
  static Horizon parse(const std::string& text);

  friend bool operator==(const Horizon& a, const Horizon& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.T_ == b.T_);
  }

 private:
  Horizon(double T, bool infinite) : T_(T), infinite_(infinite) {}
  double T_;
  bool infinite_;
};

// lambda_n = pi^2 n^2 for n = 1..N, evaluated at whatever precision is asked.
struct HeatRates {
  std::size_t N;
};
// User-supplied strictly increasing positive rates.
struct ExplicitRates {
  std::vector<double> values;
};
using RateSpec = std::variant<HeatRates, ExplicitRates>;

std::size_t rate_count(const RateSpec& spec) noexcept;
RealVector rate_values(const RateSpec& spec, long bits);
bool is_heat_rates(const RateSpec& spec) noexcept;

struct GramMatrix {
  RateSpec spec;
  RealVector rates;
  Horizon horizon = Horizon::infinite();
  RealMatrix entries;
  long precision_bits = 0;

  std::size_t size() const noexcept { return rates.size(); }
};

// Closed-form inner product <exp(-a t), exp(-b t)> on (0,T).
Real exponential_inner_product(const Real& a, const Real& b, const Horizon& horizon);

// Throws SingularGram for repeated rates, InvalidArgument for unsorted or
// non-positive ones and for precision_bits < 53.
GramMatrix gram_matrix(const RateSpec& spec, const Horizon& horizon, long precision_bits);

struct PrecisionPolicy {
  long initial_bits = 0;  // 0: max(128, 8N + 64)
  long cap_bits = 8192;
  double tolerance = 1e-20;

  long start_bits(std::size_t N) const noexcept;
};

struct BiorthogonalFamily {
  GramMatrix gram;
  // theta_m(t) = sum_j coeff(j, m) exp(-lambda_j t); coeff = G^{-1}.
  RealMatrix coeff;
  // Cholesky factor of the Gram matrix at the final precision.
  RealMatrix gram_factor;
  Real residual;
  long precision_bits = 0;
  std::vector<long> attempts;  // precisions tried, in order

  std::size_t size() const noexcept { return gram.size(); }
  const Horizon& horizon() const noexcept { return gram.horizon; }
};

// Inverts `gram`, escalating precision per `policy`. Throws
// PrecisionExhausted carrying the last residual when the cap is reached.
BiorthogonalFamily construct(const GramMatrix& gram, const PrecisionPolicy& policy = {});

// Cholesky factor of the Gram matrix, escalating precision only until the
// factorization succeeds. Used for exact Gaussian sampling.
GramMatrix gram_with_factor(const RateSpec& spec, const Horizon& horizon, long start_bits,
                            RealMatrix& factor, long cap_bits = 8192);

// Gram at policy.start_bits(N), then construct().
BiorthogonalFamily build_family(const RateSpec& spec, const Horizon& horizon,
                                const PrecisionPolicy& policy = {});

// max_{n,m} |(G C)_{nm} - delta_{nm}| at the family precision.
Real biorthogonality_defect(const GramMatrix& gram, const RealMatrix& coeff);

// d_{n,T} = (G^{-1})_{nn}^{-1/2}.
Real d_finite_real(const BiorthogonalFamily& family, long n);
double d_finite(const BiorthogonalFamily& family, long n);

// (1/sqrt(2 lambda_n)) prod_{k != n} |(lambda_k - lambda_n)/(lambda_k + lambda_n)| over
// the given rates: the distance to the span of the other exponentials on (0, inf).
Real cauchy_distance(const RealVector& rates, long n);

struct DInfinite {
  double partial;    // product over k <= K, k != n
  double limit;      // 1/(sqrt(2) sinh(pi n))
  double gap;        // partial - limit, >= 0
  double relative_gap;
};

DInfinite d_infinite(long n, long K);

struct ThetaNormReport {
  double norm;          // ||theta_n|| = (G^{-1})_{nn}^{1/2}
  double bound;         // sqrt(2) sinh(pi n) = 1/d_{n,inf}
  double ratio;         // norm / bound
  double finite_bound;  // 1/cauchy_distance over the family's own rates
  double finite_ratio;  // norm / finite_bound, >= 1 on finite horizons
};

ThetaNormReport theta_norm_bound_check(const BiorthogonalFamily& family, long n);

Real evaluate_theta_real(const BiorthogonalFamily& family, long n, const Real& t);
// Throws OutOfDomain unless 0 <= t <= T.
double evaluate_theta(const BiorthogonalFamily& family, long n, double t);

}  // namespace heatmoment
