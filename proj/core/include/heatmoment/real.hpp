#pragma once

// Extended-precision scalar backed by MPFR. Every value carries its own
// mantissa width; binary operators produce a result at the wider of the two
// operand precisions, compound assignments keep the left operand's width.
// There is no global precision state, so values can be built concurrently.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <mpfr.h>

namespace heatmoment {

class Real {
 public:
  static constexpr long kDefaultBits = 128;

  Real() : Real(0L, kDefaultBits) {}
  Real(double value, long bits);
  Real(long value, long bits);
  Real(int value, long bits) : Real(static_cast<long>(value), bits) {}
  Real(const Real& other, long bits);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  static Real from_string(std::string_view text, long bits);
  static Real pi(long bits);
  static Real infinity(long bits);

  long precision() const noexcept { return static_cast<long>(mpfr_get_prec(v_)); }
  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }

  // Decimal string that parses back bit-identically at the same precision.
  std::string str() const;

  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }

  Real& operator+=(const Real& rhs);
  Real& operator-=(const Real& rhs);
  Real& operator*=(const Real& rhs);
  Real& operator/=(const Real& rhs);
  Real& operator*=(double rhs);
  Real& operator/=(double rhs);

  Real operator-() const;

  mpfr_srcptr raw() const noexcept { return v_; }
  mpfr_ptr raw() noexcept { return v_; }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }

  friend bool bit_identical(const Real& a, const Real& b);

 private:
  mpfr_t v_;
};

Real operator+(const Real& a, const Real& b);
Real operator-(const Real& a, const Real& b);
Real operator*(const Real& a, const Real& b);
Real operator/(const Real& a, const Real& b);
Real operator*(const Real& a, double b);
Real operator*(double a, const Real& b);
Real operator/(const Real& a, double b);

Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real sqrt(const Real& x);
Real abs(const Real& x);
Real sinh(const Real& x);
Real fma(const Real& a, const Real& b, const Real& c);

std::ostream& operator<<(std::ostream& os, const Real& x);

using RealVector = std::vector<Real>;

// Number of decimal digits needed to represent `bits` of mantissa.
int decimal_digits_for_bits(long bits) noexcept;

}  // namespace heatmoment
