#include "heatmoment/real.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "heatmoment/errors.hpp"

namespace heatmoment {

namespace {

mpfr_prec_t clamp_bits(long bits) {
  if (bits < MPFR_PREC_MIN || bits > 1L << 20) {
    throw Error(ErrorKind::InvalidArgument,
                "precision of " + std::to_string(bits) + " bits is out of range");
  }
  return static_cast<mpfr_prec_t>(bits);
}

Real blank(long bits) { return Real(0L, bits); }

}  // namespace

Real::Real(double value, long bits) {
  mpfr_init2(v_, clamp_bits(bits));
  mpfr_set_d(v_, value, MPFR_RNDN);
}

Real::Real(long value, long bits) {
  mpfr_init2(v_, clamp_bits(bits));
  mpfr_set_si(v_, value, MPFR_RNDN);
}

Real::Real(const Real& other, long bits) {
  mpfr_init2(v_, clamp_bits(bits));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

Real::Real(const Real& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, other.v_);
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  if (this != &other) mpfr_swap(v_, other.v_);
  return *this;
}

Real::~Real() { mpfr_clear(v_); }

Real Real::from_string(std::string_view text, long bits) {
  Real out = blank(bits);
  std::string owned(text);
  if (owned == "inf" || owned == "+inf") {
    mpfr_set_inf(out.v_, 1);
    return out;
  }
  char* end = nullptr;
  if (mpfr_strtofr(out.v_, owned.c_str(), &end, 10, MPFR_RNDN) != 0 && end == owned.c_str()) {
    throw Error(ErrorKind::InvalidArgument, "not a decimal number: '" + owned + "'");
  }
  if (end == owned.c_str() || *end != '\0') {
    throw Error(ErrorKind::InvalidArgument, "not a decimal number: '" + owned + "'");
  }
  return out;
}

Real Real::pi(long bits) {
  Real out = blank(bits);
  mpfr_const_pi(out.v_, MPFR_RNDN);
  return out;
}

Real Real::infinity(long bits) {
  Real out = blank(bits);
  mpfr_set_inf(out.v_, 1);
  return out;
}

int decimal_digits_for_bits(long bits) noexcept {
  // One extra digit beyond ceil(bits * log10 2) guarantees round-tripping.
  return static_cast<int>(std::ceil(static_cast<double>(bits) * 0.30102999566398120)) + 1;
}

std::string Real::str() const {
  if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
  if (mpfr_nan_p(v_)) return "nan";
  if (mpfr_zero_p(v_)) return "0";
  const int digits = decimal_digits_for_bits(precision());
  std::vector<char> buffer(static_cast<std::size_t>(digits) + 64);
  const std::string fmt = "%." + std::to_string(digits - 1) + "Re";
  mpfr_snprintf(buffer.data(), buffer.size(), fmt.c_str(), v_);
  return std::string(buffer.data());
}

bool bit_identical(const Real& a, const Real& b) {
  return a.precision() == b.precision() && mpfr_equal_p(a.v_, b.v_) != 0;
}

Real& Real::operator+=(const Real& rhs) {
  mpfr_add(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator-=(const Real& rhs) {
  mpfr_sub(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator*=(const Real& rhs) {
  mpfr_mul(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator/=(const Real& rhs) {
  mpfr_div(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator*=(double rhs) {
  mpfr_mul_d(v_, v_, rhs, MPFR_RNDN);
  return *this;
}
Real& Real::operator/=(double rhs) {
  mpfr_div_d(v_, v_, rhs, MPFR_RNDN);
  return *this;
}

Real Real::operator-() const {
  Real out(*this);
  mpfr_neg(out.v_, out.v_, MPFR_RNDN);
  return out;
}

Real operator+(const Real& a, const Real& b) {
  Real out = blank(std::max(a.precision(), b.precision()));
  mpfr_add(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}
Real operator-(const Real& a, const Real& b) {
  Real out = blank(std::max(a.precision(), b.precision()));
  mpfr_sub(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}
Real operator*(const Real& a, const Real& b) {
  Real out = blank(std::max(a.precision(), b.precision()));
  mpfr_mul(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}
Real operator/(const Real& a, const Real& b) {
  Real out = blank(std::max(a.precision(), b.precision()));
  mpfr_div(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}
Real operator*(const Real& a, double b) {
  Real out = blank(a.precision());
  mpfr_mul_d(out.raw(), a.raw(), b, MPFR_RNDN);
  return out;
}
Real operator*(double a, const Real& b) { return b * a; }
Real operator/(const Real& a, double b) {
  Real out = blank(a.precision());
  mpfr_div_d(out.raw(), a.raw(), b, MPFR_RNDN);
  return out;
}

Real exp(const Real& x) {
  Real out = blank(x.precision());
  mpfr_exp(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real expm1(const Real& x) {
  Real out = blank(x.precision());
  mpfr_expm1(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real log(const Real& x) {
  Real out = blank(x.precision());
  mpfr_log(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real sqrt(const Real& x) {
  Real out = blank(x.precision());
  mpfr_sqrt(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real abs(const Real& x) {
  Real out = blank(x.precision());
  mpfr_abs(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real sinh(const Real& x) {
  Real out = blank(x.precision());
  mpfr_sinh(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}
Real fma(const Real& a, const Real& b, const Real& c) {
  Real out = blank(std::max({a.precision(), b.precision(), c.precision()}));
  mpfr_fma(out.raw(), a.raw(), b.raw(), c.raw(), MPFR_RNDN);
  return out;
}

std::ostream& operator<<(std::ostream& os, const Real& x) { return os << x.str(); }

}  // namespace heatmoment
