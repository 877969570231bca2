#include "ergo/rates.hpp"

#include <cmath>

#include "ergo/smalldiv.hpp"

namespace ergo {

namespace {

Real xi_from_parts(const Real& lambda, const Real& dist, const Real& scale) {
  const Real e = exp(Real(1));
  return sqrt(2 * scale * lambda) + sqrt(sqr(lambda) + sqr(dist)) / e;
}

void require_positive(const Real& v, const char* name) {
  if (!(v > Real(0)) || !v.is_finite()) throw ParameterError(std::string(name) + " must be positive");
}

}  // namespace

Real xi(const Real& lambda, const Real& rho, const Precision& precision) {
  require_positive(lambda, "lambda");
  PrecisionScope scope(precision.mantissa_bits);
  return xi_from_parts(lambda, torus_norm(rho, TorusConvention::two_pi, precision), Real(1));
}

Real xi_con(const Real& lambda, const Real& rho, const Precision& precision) {
  require_positive(lambda, "lambda");
  PrecisionScope scope(precision.mantissa_bits);
  return xi_from_parts(lambda, abs(rho), Real(1));
}

Real xi_trig(const Real& lambda, const Real& rho, int ell, const Precision& precision) {
  require_positive(lambda, "lambda");
  if (ell < 1) throw ParameterError("trig order must be at least 1");
  PrecisionScope scope(precision.mantissa_bits);
  Real best = torus_norm(rho, TorusConvention::two_pi, precision);
  for (int j = 2; j <= ell; ++j) best = min(best, torus_norm(rho * j, TorusConvention::two_pi, precision));
  return xi_from_parts(lambda, best, Real(1));
}

Real xi_poly(const Real& lambda, const Real& rho, std::span<const Real> coefficients, const Precision& precision) {
  require_positive(lambda, "lambda");
  PrecisionScope scope(precision.mantissa_bits);
  std::optional<Real> best;
  for (std::size_t j = 1; j < coefficients.size(); ++j) {
    if (coefficients[j].is_zero()) continue;
    const Real jl = lambda * Real(j);
    Real v = (j % 2 == 0) ? xi(jl, Real(0), precision) : xi(jl, rho * Real(j), precision);
    if (!best || v < *best) best = v;
  }
  if (!best) throw DomainError("constant polynomial: no rate is defined");
  return *best;
}

Real xi_kappa(const Real& lambda, int tau, const Precision& precision) {
  require_positive(lambda, "lambda");
  if (tau < 1) throw ParameterError("tau must be a positive integer");
  PrecisionScope scope(precision.mantissa_bits);
  const Real tl = lambda * tau;
  return 2 * sqrt(tl) + 2 * tl / exp(Real(1));
}

Real xi_width(const Real& lambda, const Real& rho, const Real& gamma, const Precision& precision) {
  require_positive(lambda, "lambda");
  require_positive(gamma, "gamma");
  PrecisionScope scope(precision.mantissa_bits);
  return xi_from_parts(lambda, torus_norm(rho, TorusConvention::two_pi, precision), gamma);
}

Real xi_linear_system(const LinearSystemSpec& spec, EigenReading reading, const Precision& precision) {
  spec.validate();
  PrecisionScope scope(precision.mantissa_bits);
  std::vector<double> moduli = spec.eigenvalue_moduli();
  double smallest = moduli.front(), largest = moduli.front();
  for (double m : moduli) {
    if (m < 1e-12) throw DomainError("zero eigenvalue: super-exponential contraction");
    smallest = std::min(smallest, m);
    largest = std::max(largest, m);
  }
  if (reading == EigenReading::modulus) {
    const Real s = smallest;
    return sqrt(2 * s) + s / exp(Real(1));
  }
  // The slowest mode decays like |s|^n = e^{-n (-ln|s|)}.
  return xi(-log(Real(largest)), Real(0), precision);
}

RatePrediction dwjq_exponent(int d, DwjqVariant variant, double zeta) {
  if (d < 1) throw ParameterError("d must be at least 1");
  RatePrediction p;
  switch (variant) {
    case DwjqVariant::almost_all:
      if (!(zeta > 1)) throw ParameterError("zeta must exceed 1 for almost every rotation");
      p.exponent_a = 1.0 / (d + 2);
      p.log_correction = zeta / (d + 2);
      p.provenance = "quasi-periodic, almost every rotation";
      break;
    case DwjqVariant::diophantine:
      p.exponent_a = 1.0 / (d + 2);
      p.provenance = "quasi-periodic, Diophantine rotation";
      break;
    case DwjqVariant::trig_poly:
      p.exponent_a = 0.5;
      p.provenance = "quasi-periodic, trigonometric polynomial";
      break;
  }
  return p;
}

double dwryzs_exponent(double p, double q, double v, int d) {
  if (!(p >= 1 && q >= 1)) throw ParameterError("p and q must be at least 1");
  if (!(v > 1)) throw ParameterError("v must exceed 1");
  if (d < 1) throw ParameterError("d must be at least 1");
  const double b = 1 + 1 / std::min(p, q);
  return v / (d + v * b);
}

RateFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientDataError("need at least 3 usable points, have " + std::to_string(n));
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw InsufficientDataError("abscissae are all equal");
  RateFit fit;
  const long double slope = sxy / sxx;
  fit.slope = static_cast<double>(slope);
  fit.intercept = static_cast<double>(my - slope * mx);
  long double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double r = y[i] - (my + slope * (x[i] - mx));
    ss_res += r * r;
  }
  fit.r2 = syy == 0 ? 1.0 : static_cast<double>(1 - ss_res / syy);
  fit.points_used = static_cast<int>(n);
  return fit;
}

namespace {

void usable_points(const ErrorSeries& series, std::vector<double>& lnN, std::vector<double>& lnE) {
  for (const auto& e : series.entries) {
    if (e.at_precision_floor || !(e.error > Real(0))) continue;
    lnN.push_back(std::log(e.extent));
    lnE.push_back(log(e.error).to_double());
  }
}

}  // namespace

RateFit fit_rate(const ErrorSeries& series, double exponent_a, double ln_correction_power) {
  if (!(exponent_a > 0 && exponent_a <= 1)) throw ParameterError("exponent_a must lie in (0,1]");
  std::vector<double> lnN, y, x;
  usable_points(series, lnN, y);
  for (double l : lnN) {
    double v = std::exp(exponent_a * l);
    if (ln_correction_power != 0) v /= std::pow(l, ln_correction_power);
    x.push_back(v);
  }
  RateFit fit = least_squares(x, y);
  fit.slope = -fit.slope;
  fit.exponent_a = exponent_a;
  fit.log_power = ln_correction_power;
  return fit;
}

RateFit fit_power_law(const ErrorSeries& series) {
  std::vector<double> x, y;
  usable_points(series, x, y);
  RateFit fit = least_squares(x, y);
  fit.model = "log";
  fit.exponent_a = 0;
  return fit;
}

}  // namespace ergo
