#include "ergo/real.hpp"

#include <cstdlib>
#include <string>

namespace ergo {

namespace {
thread_local Bits tl_bits = 256;

Bits wider(const Real& a, const Real& b) { return std::max(a.bits(), b.bits()); }
}  // namespace

void Precision::validate() const {
  if (mantissa_bits < 64) throw ParameterError("mantissa_bits must be at least 64");
  if (oracle_bits <= mantissa_bits) throw ParameterError("oracle_bits must exceed mantissa_bits");
  if (oracle_bits > (1L << 20)) throw ParameterError("oracle_bits unreasonably large");
}

Bits default_bits() noexcept { return tl_bits; }

PrecisionScope::PrecisionScope(Bits bits) : saved_(tl_bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) throw ParameterError("precision out of range");
  tl_bits = bits;
}

PrecisionScope::~PrecisionScope() { tl_bits = saved_; }

Real::Real() : Real(default_bits(), 0) {}

Real::Real(Bits bits, int) {
  mpfr_init2(x_, bits);
  mpfr_set_zero(x_, 1);
}

Real::Real(const Real& o) {
  mpfr_init2(x_, o.bits());
  mpfr_set(x_, o.x_, MPFR_RNDN);
}

Real::Real(Real&& o) noexcept {
  // Leave the source as a valid minimal-precision value.
  mpfr_init2(x_, MPFR_PREC_MIN);
  mpfr_swap(x_, o.x_);
}

Real& Real::operator=(const Real& o) {
  if (this != &o) {
    mpfr_set_prec(x_, o.bits());
    mpfr_set(x_, o.x_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& o) noexcept {
  mpfr_swap(x_, o.x_);
  return *this;
}

Real::~Real() { mpfr_clear(x_); }

Real Real::from_string(std::string_view text, Bits bits) {
  Real r(bits, 0);
  std::string s(text);
  char* end = nullptr;
  if (!s.empty()) mpfr_strtofr(r.x_, s.c_str(), &end, 10, MPFR_RNDN);
  if (s.empty() || end == s.c_str() || *end != '\0' || !r.is_finite())
    throw ParameterError("not a number: '" + s + "'");
  return r;
}

Real Real::from_ratio(long num, long den, Bits bits) {
  if (den == 0) throw DomainError("zero denominator");
  Real r(bits, 0);
  mpfr_set_si(r.x_, num, MPFR_RNDN);
  mpfr_div_si(r.x_, r.x_, den, MPFR_RNDN);
  return r;
}

Real Real::rounded(Bits bits) const {
  Real r(bits, 0);
  mpfr_set(r.x_, x_, MPFR_RNDN);
  return r;
}

long Real::exponent2() const {
  if (!mpfr_regular_p(x_)) return 0;
  return mpfr_get_exp(x_);
}

std::string Real::to_string(int digits) const {
  if (mpfr_nan_p(x_)) return "nan";
  if (mpfr_inf_p(x_)) return mpfr_sgn(x_) > 0 ? "inf" : "-inf";
  if (digits < 1) digits = 1;
  char* out = nullptr;
  std::string fmt = "%." + std::to_string(digits - 1) + "Re";
  if (mpfr_asprintf(&out, fmt.c_str(), x_) < 0) throw Error("formatting failed");
  std::string s(out);
  mpfr_free_str(out);
  return s;
}

Real Real::operator-() const {
  Real r(bits(), 0);
  mpfr_neg(r.x_, x_, MPFR_RNDN);
  return r;
}

Real& Real::operator+=(const Real& o) { return *this = *this + o; }
Real& Real::operator-=(const Real& o) { return *this = *this - o; }
Real& Real::operator*=(const Real& o) { return *this = *this * o; }
Real& Real::operator/=(const Real& o) { return *this = *this / o; }

Real operator+(const Real& a, const Real& b) {
  Real r(wider(a, b), 0);
  mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN);
  return r;
}

Real operator-(const Real& a, const Real& b) {
  Real r(wider(a, b), 0);
  mpfr_sub(r.x_, a.x_, b.x_, MPFR_RNDN);
  return r;
}

Real operator*(const Real& a, const Real& b) {
  Real r(wider(a, b), 0);
  mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN);
  return r;
}

Real operator/(const Real& a, const Real& b) {
  Real r(wider(a, b), 0);
  mpfr_div(r.x_, a.x_, b.x_, MPFR_RNDN);
  return r;
}

#define ERGO_UNARY(name, call)                 \
  Real name(const Real& x) {                   \
    Real r = Real::zero(x.bits());             \
    call(r.raw(), x.raw(), MPFR_RNDN);         \
    return r;                                  \
  }

ERGO_UNARY(abs, mpfr_abs)
ERGO_UNARY(sqrt, mpfr_sqrt)
ERGO_UNARY(sqr, mpfr_sqr)
ERGO_UNARY(exp, mpfr_exp)
ERGO_UNARY(log, mpfr_log)
ERGO_UNARY(log10, mpfr_log10)
ERGO_UNARY(log1p, mpfr_log1p)
ERGO_UNARY(sin, mpfr_sin)
ERGO_UNARY(cos, mpfr_cos)
#undef ERGO_UNARY

void sin_cos(const Real& x, Real& s, Real& c) {
  s = Real::zero(x.bits());
  c = Real::zero(x.bits());
  mpfr_sin_cos(s.raw(), c.raw(), x.raw(), MPFR_RNDN);
}

Real atan2(const Real& y, const Real& x) {
  Real r = Real::zero(std::max(x.bits(), y.bits()));
  mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real pow(const Real& x, const Real& y) {
  Real r = Real::zero(std::max(x.bits(), y.bits()));
  mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
  return r;
}

Real pow(const Real& x, long n) {
  Real r = Real::zero(x.bits());
  mpfr_pow_si(r.raw(), x.raw(), n, MPFR_RNDN);
  return r;
}

Real floor(const Real& x) {
  Real r = Real::zero(x.bits());
  mpfr_floor(r.raw(), x.raw());
  return r;
}

Real round(const Real& x) {
  Real r = Real::zero(x.bits());
  mpfr_round(r.raw(), x.raw());
  return r;
}

Real frac(const Real& x) {
  Real r = x - floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (r >= Real(1)) r = Real::zero(x.bits());
  return r;
}

Real ldexp(const Real& x, long e) {
  Real r = Real::zero(x.bits());
  mpfr_mul_2si(r.raw(), x.raw(), e, MPFR_RNDN);
  return r;
}

Real min(const Real& a, const Real& b) { return b < a ? b : a; }
Real max(const Real& a, const Real& b) { return a < b ? b : a; }

Real factorial(unsigned long m, Bits bits) {
  Real r = Real::zero(bits);
  mpfr_fac_ui(r.raw(), m, MPFR_RNDN);
  return r;
}

Real pi(Bits bits) {
  Real r = Real::zero(bits);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

Real two_pi(Bits bits) { return ldexp(pi(bits), 1); }

Real precision_floor(Bits bits) {
  Real r = Real::zero(bits);
  mpfr_set_ui_2exp(r.raw(), 1, -(bits - 40), MPFR_RNDN);
  return r;
}

Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

Complex operator/(const Complex& a, const Complex& b) {
  Real den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

Real abs(const Complex& z) {
  Real r = Real::zero(z.bits());
  mpfr_hypot(r.raw(), z.re.raw(), z.im.raw(), MPFR_RNDN);
  return r;
}

Complex exp(const Complex& z) {
  Real m = exp(z.re);
  Real s, c;
  sin_cos(z.im, s, c);
  return {m * c, m * s};
}

Complex log(const Complex& z) { return {log(abs(z)), atan2(z.im, z.re)}; }

Complex pow(const Complex& z, const Real& p) { return exp(log(z) * p); }

Complex polar(const Real& r, const Real& theta) {
  Real s, c;
  sin_cos(theta, s, c);
  return {r * c, r * s};
}

Real sum_ordered(std::span<const Real> terms, const Precision& precision) {
  Real acc = Real::zero(precision.mantissa_bits);
  for (const Real& t : terms) {
    if (!t.is_finite()) throw DomainError("non-finite term in summation");
    mpfr_add(acc.raw(), acc.raw(), t.raw(), MPFR_RNDN);
  }
  return acc;
}

bool oracle_agrees(const Real& working, const Real& oracle, const Precision& precision) {
  const Bits b = precision.mantissa_bits;
  Real diff = abs(working.rounded(precision.oracle_bits) - oracle);
  Real floor_value = precision_floor(b);
  Real mag = abs(oracle);
  if (mag > floor_value) return diff <= ldexp(mag, -(b - 20));
  return diff <= floor_value;
}

}  // namespace ergo
