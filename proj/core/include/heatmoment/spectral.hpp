#pragma once

// Dirichlet sine basis on (0,1): e_n(x) = sqrt(2) sin(pi n x), lambda_n = pi^2 n^2.
// Noise profiles and states are finite coefficient sequences in that basis;
// anything reported as a norm or a sum carries either a tail bound or a
// `truncated` flag.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "heatmoment/quadrature.hpp"

namespace heatmoment {

class ModeIndex {
 public:
  // Throws InvalidMode for n < 1.
  explicit ModeIndex(long n);
  long value() const noexcept { return n_; }

 private:
  long n_;
};

double eigenvalue(ModeIndex n);
double eigenvalue(long n);
double eigenfunction_eval(ModeIndex n, double x);

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  static StateVector zeros(std::size_t N) { return StateVector(std::vector<double>(N, 0.0)); }
  // e_n embedded in N modes (1-based n).
  static StateVector unit(long n, std::size_t N);

  std::size_t size() const noexcept { return coeffs_.size(); }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  // 1-based accessor; modes beyond the stored range are zero.
  double mode(long n) const noexcept;

  std::span<const double> coeffs() const noexcept { return coeffs_; }

  double norm_sq() const noexcept;
  double norm() const noexcept;

  StateVector resized(std::size_t N) const;
  StateVector scaled(double c) const;
  StateVector normalized() const;
  friend StateVector operator+(const StateVector& a, const StateVector& b);
  friend StateVector operator-(const StateVector& a, const StateVector& b);

 private:
  std::vector<double> coeffs_;
};

// Closed-form projection targets.
struct ZeroFunction {};
struct Eigenmode {
  long n;
};
struct ParabolaBump {};  // g(x) = x (1 - x)

using ProjectionSource =
    std::variant<std::function<double(double)>, ZeroFunction, Eigenmode, ParabolaBump>;

struct Projection {
  StateVector state;
  // Largest per-coefficient quadrature error estimate; 0 for closed forms.
  double quadrature_error = 0.0;
  double tolerance = 0.0;
  bool closed_form = false;
};

Projection project(const ProjectionSource& g, std::size_t N, const QuadratureOptions& opts = {});

struct DiracDelta {
  double p;
};
struct GaussianDecay {
  double alpha;
  double C;
};
struct Explicit {};

using ProfileKind = std::variant<Explicit, DiracDelta, GaussianDecay>;

struct LowerBound {
  double C;
  double alpha;
};

class NoiseProfile {
 public:
  // Explicit coefficients. A supplied lower bound is checked and rejected with
  // InvalidArgument if any stored coefficient violates it.
  NoiseProfile(std::vector<double> coeffs, double s, std::optional<LowerBound> bound = {});

  const ProfileKind& kind() const noexcept { return kind_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  // 1-based; throws OutOfDomain beyond the stored range.
  double coeff(long n) const;
  double s() const noexcept { return s_; }
  const std::optional<LowerBound>& lower_bound() const noexcept { return bound_; }

  // First mode with f_n == 0, if any, among the first N.
  std::optional<long> first_degenerate_mode(std::size_t N) const;

 private:
  friend NoiseProfile delta_profile(double p, std::size_t N, double s);
  friend NoiseProfile gaussian_decay_profile(double alpha, double C, std::size_t N, double s);
  NoiseProfile(ProfileKind kind, std::vector<double> coeffs, double s,
               std::optional<LowerBound> bound);

  ProfileKind kind_;
  std::vector<double> coeffs_;
  double s_;
  std::optional<LowerBound> bound_;
};

// f_n = sqrt(2) sin(pi n p). p must lie strictly inside (0,1).
NoiseProfile delta_profile(double p, std::size_t N, double s = 0.75);
// f_n = C exp(-alpha pi^2 n^2).
NoiseProfile gaussian_decay_profile(double alpha, double C, std::size_t N, double s = 0.0);

struct LowerBoundReport {
  bool holds = false;
  long worst_n = 0;
  double best_C = 0.0;
  // log(best_C); stays finite when best_C underflows or overflows.
  double log_best_C = 0.0;
  std::vector<long> degenerate_modes;
};

LowerBoundReport verify_lower_bound(const NoiseProfile& profile, double C, double alpha,
                                    std::size_t N);

// dist(n p, Z) = |n p - round(n p)|.
double dist_to_integers(double p, long n);

struct SineSandwich {
  double distance;
  double sine;  // |sin(pi n p)|
  double lower;  // 2 dist
  double upper;  // pi dist
  bool holds;
};

SineSandwich sine_sandwich(double p, long n);

// 4 exp(-alpha pi^2 n^2), the measure bound on {p : dist(np, Z) < exp(-alpha pi^2 n^2)}.
double borel_cantelli_bound(double alpha, long n);

struct BorelCantelliSum {
  double partial_sum;  // sum_{k<=n} 4 exp(-alpha pi^2 k^2)
  double tail_bound;   // bound on sum_{k>n}
};

BorelCantelliSum borel_cantelli_partial(double alpha, long n);

struct SobolevNorm {
  double value;  // (sum_{n<=N} lambda_n^{-s} f_n^2)^{1/2}
  // Bound on the omitted sum_{n>N} lambda_n^{-s} f_n^2 (squared scale);
  // +inf when the closed form gives none.
  double tail_bound_sq;
  bool truncated;
};

SobolevNorm sobolev_norm(const NoiseProfile& profile, double s);

struct HsIntegral {
  double value;
  double error_estimate;
  // True when beta < (1 - s)/2, the range where the untruncated integral is finite.
  bool finite_regime;
};

// int_0^T t^{-2 beta} sum_n exp(-2 lambda_n t) f_n^2 dt, with t = u^{1/(1-2beta)}
// removing the endpoint singularity. Throws InvalidBeta unless 0 < beta < 1/2.
HsIntegral hs_integral(const NoiseProfile& profile, double s, double beta, double T,
                       const QuadratureOptions& opts = {});

}  // namespace heatmoment
