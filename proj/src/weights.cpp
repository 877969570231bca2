#include "ergo/weights.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace ergo {

namespace {

double parse_double(std::string_view s) {
  std::string text(s);
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw ParameterError("bad number '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParameterError("bad number '" + text + "'");
  }
}

// Exponents below this (in natural log) underflow to an exact zero.
Real underflow_threshold(Bits bits) { return Real(static_cast<long>(bits + 64)) * std::log(2.0); }

bool unit_pq(const WeightSpec& s) { return s.p == 1 && s.q == 1; }

bool small_integer(double v) { return v >= 1 && v <= 64 && v == std::floor(v); }

Complex ipow(Complex z, long n) {
  Complex r(Real(1));
  while (n > 0) {
    if (n & 1) r = r * z;
    z = z * z;
    n >>= 1;
  }
  return r;
}

}  // namespace

WeightSpec WeightSpec::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view name = text.substr(0, colon);
  std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  WeightSpec spec;
  if (name == "exp_pq") {
    auto comma = args.find(',');
    if (args.empty()) return WeightSpec::canonical();
    if (comma == std::string_view::npos) throw ParameterError("exp_pq expects p,q");
    spec = exp_pq(parse_double(args.substr(0, comma)), parse_double(args.substr(comma + 1)));
  } else if (name == "exp_width") {
    if (args.empty()) throw ParameterError("exp_width expects gamma");
    spec = exp_width(parse_double(args));
  } else if (name == "laskar_sin2") {
    spec = laskar_sin2();
  } else if (name == "poly_x1mx") {
    spec = poly_x1mx();
  } else if (name == "uniform") {
    spec = uniform();
  } else {
    throw ParameterError("unknown weight '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case KernelKind::exp_pq: os << "exp_pq:" << p << ',' << q; break;
    case KernelKind::exp_width: os << "exp_width:" << gamma; break;
    case KernelKind::laskar_sin2: os << "laskar_sin2"; break;
    case KernelKind::poly_x1mx: os << "poly_x1mx"; break;
    case KernelKind::uniform: os << "uniform"; break;
  }
  return os.str();
}

void WeightSpec::validate() const {
  if (kind == KernelKind::exp_pq && !(p > 0 && q > 0 && std::isfinite(p) && std::isfinite(q)))
    throw ParameterError("exp_pq requires p > 0 and q > 0");
  if (kind == KernelKind::exp_width && !(gamma > 0 && std::isfinite(gamma)))
    throw ParameterError("exp_width requires gamma > 0");
}

Real eval_kernel(const WeightSpec& spec, const Real& x, const Precision& precision) {
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const Real zero = Real::zero(bits);
  switch (spec.kind) {
    case KernelKind::uniform:
      return (x >= zero && x < Real(1)) ? Real(1) : zero;
    case KernelKind::poly_x1mx:
      return (x > zero && x < Real(1)) ? x * (1 - x) : zero;
    case KernelKind::laskar_sin2:
      return (x > zero && x < Real(1)) ? sqr(sin(pi(bits) * x)) : zero;
    case KernelKind::exp_pq:
    case KernelKind::exp_width:
      break;
  }
  if (!(x > zero && x < Real(1))) return zero;
  const Real y = 1 - x;
  Real e;
  if (spec.kind == KernelKind::exp_width)
    e = Real(spec.gamma) / (x * y);
  else if (unit_pq(spec))
    e = 1 / (x * y);
  else if (small_integer(spec.p) && small_integer(spec.q))
    e = 1 / (pow(x, static_cast<long>(spec.p)) * pow(y, static_cast<long>(spec.q)));
  else
    e = pow(x, Real(-spec.p)) * pow(y, Real(-spec.q));
  if (e > underflow_threshold(bits)) return zero;
  return exp(-e);
}

Complex eval_kernel_complex(const WeightSpec& spec, const Complex& z, const Precision& precision) {
  if (!spec.is_exponential()) throw SpecificationError("complex evaluation needs an exponential kernel");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const Complex one(Real(1));
  const Complex y = one - z;
  Complex e;
  if (spec.kind == KernelKind::exp_width)
    e = Complex(Real(spec.gamma)) / (z * y);
  else if (unit_pq(spec))
    e = one / (z * y);
  else if (small_integer(spec.p) && small_integer(spec.q))
    e = one / (ipow(z, static_cast<long>(spec.p)) * ipow(y, static_cast<long>(spec.q)));
  else
    e = pow(z, Real(-spec.p)) * pow(y, Real(-spec.q));
  if (!e.is_finite()) return {Real::zero(bits), Real::zero(bits)};
  if (e.re > underflow_threshold(bits)) return {Real::zero(bits), Real::zero(bits)};
  return exp(-e);
}

std::vector<Real> weight_table(const WeightSpec& spec, long N, const Precision& precision, Execution exec) {
  if (N < 1) throw ParameterError("N must be positive");
  spec.validate();
  const Bits bits = precision.mantissa_bits;
  return tabulate(static_cast<std::size_t>(N), bits, exec, [&](std::size_t n) {
    return eval_kernel(spec, Real::from_ratio(static_cast<long>(n), N, bits), precision);
  });
}

Real weight_sum(const WeightSpec& spec, long N, const Precision& precision, Execution exec) {
  Real a = sum_ordered(weight_table(spec, N, precision, exec), precision);
  if (a.is_zero()) throw DegenerateWeightError("A_N = 0 for N = " + std::to_string(N) + " (" + spec.describe() + ")");
  return a;
}

Real normalizer(const WeightSpec& spec, const Precision& precision) {
  spec.validate();
  using Key = std::tuple<int, double, double, double, Bits>;
  static std::mutex mutex;
  static std::map<Key, Real> cache;
  Key key{static_cast<int>(spec.kind), spec.p, spec.q, spec.gamma, precision.mantissa_bits};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  PrecisionScope scope(precision.mantissa_bits);
  Real value = integrate([&](const Real& x) { return eval_kernel(spec, x, precision); }, Real(0), Real(1),
                         QuadratureConfig{}, precision);
  cache.emplace(key, value);
  return value;
}

KernelValue kernel_value(const WeightSpec& spec, const Real& x, const Precision& precision) {
  return {eval_kernel(spec, x, precision), normalizer(spec, precision)};
}

Real kernel_derivative(const WeightSpec& spec, const Real& x, int m, const Precision& precision) {
  if (m < 0) throw ParameterError("derivative order must be nonnegative");
  if (m == 0) return eval_kernel(spec, x, precision);
  if (!spec.is_exponential()) throw SpecificationError("contour derivatives need an exponential kernel");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  if (!(x > Real(0) && x < Real(1))) throw ParameterError("derivative point must lie in (0,1)");
  const int K = std::max(64, 8 * m);
  Real delta = min(x, 1 - x) / 2;
  const Real step = two_pi(bits) / K;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Real acc = Real::zero(bits);
    bool finite = true;
    for (int k = 0; k < K && finite; ++k) {
      Complex node = polar(delta, step * k);
      Complex w = eval_kernel_complex(spec, Complex(x) + node, precision);
      if (!w.is_finite()) {
        finite = false;
        break;
      }
      Real c, s;
      sin_cos(step * (static_cast<long>(k) * m % K), s, c);
      // Real part of w * exp(-i k m step).
      acc += w.re * c + w.im * s;
    }
    if (finite) return factorial(static_cast<unsigned long>(m), bits) * acc / (pow(delta, static_cast<long>(m)) * K);
    delta /= 2;
  }
  throw ContourError("non-finite kernel value on the Cauchy contour at x = " + x.to_string(20));
}

Real l1_decay_norm(const WeightSpec& spec, int m, const Real& lambda, long N, const QuadratureConfig& config,
                   const Precision& precision) {
  if (!(lambda > Real(0))) throw ParameterError("lambda must be positive");
  if (N < 1) throw ParameterError("N must be positive");
  PrecisionScope scope(precision.mantissa_bits);
  const Real rate = lambda * Real(N);
  auto f = [&, m](const Real& y) {
    if (!(y > Real(0) && y < Real(1))) return Real::zero(precision.mantissa_bits);
    return kernel_derivative(spec, y, m, precision) * exp(-rate * y);
  };
  if (m == 0) return integrate(f, Real(0), Real(1), config, precision);
  return integrate_abs(f, Real(0), Real(1), config, precision, 64 * (m + 1));
}

std::vector<Real> derivative_norm_growth(const WeightSpec& spec, int m_max, const Precision& precision) {
  if (spec.kind != KernelKind::exp_pq) throw SpecificationError("derivative growth is defined for exp_pq");
  if (m_max < 2 || m_max > 12) throw ParameterError("m_max must lie in [2, 12]");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  // On each sign-definite piece of D^m w the L1 norm is the change of
  // D^(m-1) w across it; D^(m-1) w vanishes at both ends of [0,1].
  const int grid = 512;
  std::vector<Real> norms;
  for (int m = 1; m <= m_max; ++m) {
    auto dm = [&](const Real& x) { return kernel_derivative(spec, x, m, precision); };
    std::vector<Real> samples = tabulate(grid - 1, bits, Execution::parallel, [&](std::size_t i) {
      return dm(Real::from_ratio(static_cast<long>(i) + 1, grid, bits));
    });
    // The contour rule resolves values only to about 2^-64 of the peak;
    // sign flips below that are aliasing noise and cannot move the norm.
    Real peak = Real::zero(bits);
    for (const Real& v : samples) peak = max(peak, abs(v));
    const Real noise = ldexp(peak, -64);
    std::vector<Real> cuts;
    for (int i = 0; i + 1 < grid - 1; ++i) {
      const int s0 = samples[i].sign(), s1 = samples[i + 1].sign();
      if (s0 * s1 >= 0) continue;
      if (abs(samples[i]) < noise && abs(samples[i + 1]) < noise) continue;
      Real lo = Real::from_ratio(i + 1, grid, bits), hi = Real::from_ratio(i + 2, grid, bits);
      for (int it = 0; it < 60; ++it) {
        Real mid = (lo + hi) / 2;
        (dm(mid).sign() == s0 ? lo : hi) = mid;
      }
      cuts.push_back((lo + hi) / 2);
    }
    std::vector<Real> values{Real::zero(bits)};
    for (const Real& c : cuts) values.push_back(kernel_derivative(spec, c, m - 1, precision));
    values.push_back(Real::zero(bits));
    std::vector<Real> jumps;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) jumps.push_back(abs(values[i + 1] - values[i]));
    norms.push_back(sum_ordered(jumps, precision));
  }
  return norms;
}

namespace {

// exp(-tau^2) = tolerance * 2^-64. Tied to the tolerance rather than the
// precision so a recomputation at oracle_bits integrates the same interval.
Real truncation_tau(const QuadratureConfig& config) {
  return sqrt(Real(-std::log(config.relative_tolerance) + 64 * std::log(2.0)));
}

}  // namespace

Real cauchy_schlomilch_phi(const Real& A, const Real& B, const Precision& precision, const QuadratureConfig& config,
                           double cutoff_scale) {
  if (!(A > Real(0))) throw ParameterError("A must be positive");
  if (B < Real(0)) throw ParameterError("B must be nonnegative");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  // Beyond S, A s - B/s exceeds tau and the tail is below exp(-tau^2).
  const Real tau = truncation_tau(config);
  const Real S = (tau + sqrt(tau * tau + 4 * A * B)) / (2 * A) * Real(cutoff_scale);
  auto f = [&](const Real& s) { return exp(-sqr(A * s - B / s)); };
  return integrate(f, Real(0), S, config, precision);
}

PsiValues psi_identity(const Real& sigma, const Real& eta, const Precision& precision,
                       const QuadratureConfig& config) {
  if (!(sigma > Real(0)) || !(eta > Real(0))) throw ParameterError("sigma and eta must be positive");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const Real tau = truncation_tau(config);
  const Real S = tau / sqrt(sigma);
  auto f = [&](const Real& s) { return exp(-sigma * s * s - eta / (s * s)); };
  Real quad = integrate(f, Real(0), S, config, precision);
  Real closed = exp(-2 * sqrt(sigma * eta)) * sqrt(pi(bits)) / (2 * sqrt(sigma));
  return {quad, closed};
}

}  // namespace ergo
