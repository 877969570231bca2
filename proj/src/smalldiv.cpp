#include "ergo/smalldiv.hpp"

#include <cmath>
#include <string>

namespace ergo {

Real torus_norm(const Real& x, TorusConvention convention, const Precision& precision) {
  if (!x.is_finite()) throw DomainError("torus norm of a non-finite value");
  const Bits bits = std::max(precision.mantissa_bits, x.bits());
  PrecisionScope scope(bits);
  const Real period = convention == TorusConvention::two_pi ? two_pi(bits) : Real(1);
  Real r = x.rounded(bits) - period * round(x / period);
  return abs(r);
}

Real small_divisor(std::span<const long> k, std::span<const Real> rho, const Precision& precision) {
  if (k.size() != rho.size()) throw ParameterError("k and rho must have the same dimension");
  bool nonzero = false;
  for (long v : k) nonzero = nonzero || v != 0;
  if (!nonzero) throw ParameterError("k must be nonzero");
  PrecisionScope scope(precision.mantissa_bits);
  std::vector<Real> parts;
  for (std::size_t i = 0; i < k.size(); ++i) parts.push_back(Real(k[i]) * rho[i]);
  return torus_norm(sum_ordered(parts, precision), TorusConvention::unit, precision);
}

namespace {

BigInt to_bigint(const Real& integral) {
  char* out = nullptr;
  mpfr_asprintf(&out, "%.0Rf", integral.raw());
  BigInt v(out);
  mpfr_free_str(out);
  return v;
}

void push_convergent(ContinuedFraction& cf, const BigInt& a) {
  cf.quotients.push_back(a);
  const std::size_t k = cf.quotients.size() - 1;
  if (k == 0) {
    cf.p.push_back(a);
    cf.q.push_back(1);
  } else if (k == 1) {
    cf.p.push_back(a * cf.p[0] + 1);
    cf.q.push_back(a);
  } else {
    cf.p.push_back(a * cf.p[k - 1] + cf.p[k - 2]);
    cf.q.push_back(a * cf.q[k - 1] + cf.q[k - 2]);
  }
}

}  // namespace

ContinuedFraction continued_fraction(const Real& x, int terms, const Precision& precision) {
  if (terms < 1) throw ParameterError("terms must be positive");
  if (!x.is_finite()) throw DomainError("continued fraction of a non-finite value");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  // 16 guard bits; remainders smaller than this relative to the input are
  // rounding residue of a rational.
  const Real eps = ldexp(Real(1), -(bits - 16));
  ContinuedFraction cf;
  Real r = x.rounded(bits);
  for (int i = 0; i < terms; ++i) {
    Real a = floor(r);
    push_convergent(cf, to_bigint(a));
    Real f = r - a;
    if (i + 1 == terms) break;
    if (f <= eps * max(Real(1), abs(r))) {
      cf.exhausted = true;
      break;
    }
    // |x - p_k/q_k| < 1/q_k^2 can only be resolved while q_k^2 stays within the precision.
    const BigInt& qk = cf.q.back();
    if (static_cast<long>(boost::multiprecision::msb(qk)) * 2 + 24 > static_cast<long>(bits)) {
      cf.partial = true;
      break;
    }
    r = 1 / f;
  }
  return cf;
}

ContinuedFraction continued_fraction(long num, long den, int terms) {
  if (terms < 1) throw ParameterError("terms must be positive");
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  ContinuedFraction cf;
  BigInt a = num, b = den;
  for (int i = 0; i < terms; ++i) {
    // Floor division.
    BigInt qv = a / b;
    if ((a % b != 0) && (a < 0)) qv -= 1;
    push_convergent(cf, qv);
    BigInt rem = a - qv * b;
    if (rem == 0) {
      cf.exhausted = true;
      break;
    }
    a = b;
    b = rem;
  }
  return cf;
}

NonresonanceScan nonresonance_scan(std::span<const Real> rho, double zeta, long K_max, const Precision& precision,
                                   Execution exec) {
  if (rho.empty()) throw ParameterError("rho must be nonempty");
  if (K_max < 1) throw ParameterError("K_max must be at least 1");
  if (!(zeta >= 0)) throw ParameterError("zeta must be nonnegative");
  const int d = static_cast<int>(rho.size());
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  // Lattice points with first nonzero component positive, in lexicographic order.
  std::vector<std::vector<long>> ks;
  std::vector<long> k(d, -K_max);
  for (;;) {
    long first = 0;
    for (long v : k)
      if (v != 0) {
        first = v;
        break;
      }
    if (first > 0) ks.push_back(k);
    int i = d - 1;
    while (i >= 0 && k[i] == K_max) k[i--] = -K_max;
    if (i < 0) break;
    ++k[i];
  }
  std::vector<Real> values = tabulate(ks.size(), bits, exec, [&](std::size_t idx) {
    const auto& kv = ks[idx];
    Real norm2 = 0;
    for (long v : kv) norm2 += Real(v * v);
    const Real norm = sqrt(norm2);
    Real weight = pow(norm, static_cast<long>(d));
    if (zeta != 0) weight *= pow(log1p(norm), Real(zeta));
    return weight * small_divisor(kv, rho, precision);
  });
  NonresonanceScan scan{d, std::vector<Real>(rho.begin(), rho.end()), zeta, K_max, values[0], ks[0]};
  // Strict comparison keeps the lexicographically smallest k on ties.
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < scan.alpha_estimate) {
      scan.alpha_estimate = values[i];
      scan.argmin = ks[i];
    }
  return scan;
}

Real parse_rotation(std::string_view text, Bits bits) {
  PrecisionScope scope(bits);
  const Real five = 5;
  if (text == "golden") return (sqrt(five) - 1) / 2;
  if (text == "golden_phi") return (sqrt(five) + 1) / 2;
  if (text == "sqrt2") return sqrt(Real(2));
  if (text == "inv_pi") return 1 / pi(bits);
  if (text == "3/(2pi)") return 3 / two_pi(bits);
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    Real num = Real::from_string(text.substr(0, slash), bits);
    Real den = Real::from_string(text.substr(slash + 1), bits);
    if (den.is_zero()) throw ParameterError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return Real::from_string(text, bits);
}

}  // namespace ergo
