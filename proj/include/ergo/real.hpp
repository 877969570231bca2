#pragma once

#include <mpfr.h>

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergo/errors.hpp"

namespace ergo {

using Bits = mpfr_prec_t;

// Working precision and the doubled precision used to re-check results.
struct Precision {
  Bits mantissa_bits = 256;
  Bits oracle_bits = 512;

  static Precision with_bits(Bits bits) { return {bits, 2 * bits}; }
  void validate() const;
  Precision oracle() const { return with_bits(oracle_bits); }
};

// Precision given to Reals created from plain numbers on the calling thread.
Bits default_bits() noexcept;

class PrecisionScope {
 public:
  explicit PrecisionScope(Bits bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  Bits saved_;
};

class Real {
 public:
  Real();
  explicit Real(Bits bits, int tag);  // zero at the given precision
  template <std::signed_integral T>
  Real(T v) : Real(default_bits(), 0) {
    mpfr_set_si(x_, static_cast<long>(v), MPFR_RNDN);
  }
  template <std::unsigned_integral T>
  Real(T v) : Real(default_bits(), 0) {
    mpfr_set_ui(x_, static_cast<unsigned long>(v), MPFR_RNDN);
  }
  template <std::floating_point T>
  Real(T v) : Real(default_bits(), 0) {
    mpfr_set_d(x_, static_cast<double>(v), MPFR_RNDN);
  }
  Real(const Real& o);
  Real(Real&& o) noexcept;
  Real& operator=(const Real& o);
  Real& operator=(Real&& o) noexcept;
  ~Real();

  static Real zero(Bits bits) { return Real(bits, 0); }
  static Real from_string(std::string_view text, Bits bits);
  static Real from_ratio(long num, long den, Bits bits);

  Bits bits() const { return mpfr_get_prec(x_); }
  Real rounded(Bits bits) const;
  bool is_finite() const { return mpfr_number_p(x_) != 0; }
  bool is_zero() const { return mpfr_zero_p(x_) != 0; }
  int sign() const { return mpfr_sgn(x_); }
  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(x_, MPFR_RNDN); }
  long exponent2() const;  // e with |x| in [2^(e-1), 2^e); 0 for zero
  // Scientific notation with the given number of significant digits.
  std::string to_string(int digits) const;

  mpfr_ptr raw() { return x_; }
  mpfr_srcptr raw() const { return x_; }

  Real operator-() const;
  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.x_, b.x_) != 0; }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.x_, b.x_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.x_, b.x_) != 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.x_, b.x_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.x_, b.x_) != 0; }

 private:
  mpfr_t x_;
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real sqr(const Real& x);
Real exp(const Real& x);
Real log(const Real& x);
Real log10(const Real& x);
Real log1p(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
void sin_cos(const Real& x, Real& s, Real& c);
Real atan2(const Real& y, const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long n);
Real floor(const Real& x);
Real round(const Real& x);  // nearest integer, ties away from zero
Real frac(const Real& x);   // x - floor(x), in [0, 1)
Real ldexp(const Real& x, long e);
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);
Real factorial(unsigned long m, Bits bits);
Real pi(Bits bits);
Real two_pi(Bits bits);
// 2^-(bits-40): magnitudes below this are treated as rounding noise.
Real precision_floor(Bits bits);

struct Complex {
  Real re;
  Real im;

  Complex() = default;
  Complex(Real r) : re(r), im(Real::zero(r.bits())) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  Bits bits() const { return std::max(re.bits(), im.bits()); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }
  Complex conj() const { return {re, -im}; }

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator*(const Complex& a, const Complex& b);
  friend Complex operator/(const Complex& a, const Complex& b);
  friend Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
  Complex operator-() const { return {-re, -im}; }
};

Real abs(const Complex& z);
Complex exp(const Complex& z);
Complex log(const Complex& z);  // principal branch
Complex pow(const Complex& z, const Real& p);
Complex polar(const Real& r, const Real& theta);

// Sum accumulated strictly in index order at the working precision.
Real sum_ordered(std::span<const Real> terms, const Precision& precision);

// The oracle rule: relative agreement to 2^-(bits-20) when |oracle| exceeds
// the precision floor, absolute agreement to the floor otherwise.
bool oracle_agrees(const Real& working, const Real& oracle, const Precision& precision);

}  // namespace ergo
