#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergo/averaging.hpp"
#include "ergo/generators.hpp"
#include "ergo/real.hpp"

namespace ergo {

// Predicted error bound exp(-xi N^a (ln N)^{-c}).
struct RatePrediction {
  std::optional<Real> xi;  // empty when only the exponent is known
  double exponent_a = 0.5;
  double log_correction = 0;
  std::string provenance;
};

struct RateFit {
  double slope = 0;  // fitted xi, sign-flipped so decaying series give slope > 0
  double intercept = 0;
  double r2 = 0;
  double exponent_a = 0.5;
  double log_power = 0;
  int points_used = 0;
  std::string model = "power";  // "power": x = N^a / (ln N)^c; "log": x = ln N, raw slope
};

// sqrt(2 l) + e^{-1} sqrt(l^2 + ||r||^2) with ||.|| the distance to 2 pi Z.
Real xi(const Real& lambda, const Real& rho, const Precision& precision = {});
// As xi with |r| in place of ||r||.
Real xi_con(const Real& lambda, const Real& rho, const Precision& precision = {});
// As xi with min_{1<=j<=l} ||j r||.
Real xi_trig(const Real& lambda, const Real& rho, int ell, const Precision& precision = {});
// min over nonzero Q_j, j >= 1: xi(j l, 0) for even j, xi(j l, j r) for odd j.
Real xi_poly(const Real& lambda, const Real& rho, std::span<const Real> coefficients, const Precision& precision = {});
// 2 sqrt(tau l) + 2 tau l / e.
Real xi_kappa(const Real& lambda, int tau, const Precision& precision = {});
// sqrt(2 gamma l) + e^{-1} sqrt(l^2 + ||r||^2).
Real xi_width(const Real& lambda, const Real& rho, const Real& gamma, const Precision& precision = {});

// decay_rate: xi(min_j -ln|s_j|, 0). modulus: sqrt(2 min|s_j|) + min|s_j| / e.
enum class EigenReading { decay_rate, modulus };
Real xi_linear_system(const LinearSystemSpec& spec, EigenReading reading = EigenReading::decay_rate,
                      const Precision& precision = {});

enum class DwjqVariant { almost_all, diophantine, trig_poly };
RatePrediction dwjq_exponent(int d, DwjqVariant variant, double zeta = 0);
// v / (d + v (1 + 1/min(p, q))).
double dwryzs_exponent(double p, double q, double v, int d);

// Least squares of ln(error) on N^a / (ln N)^c over usable entries (error > 0,
// not at the precision floor).
RateFit fit_rate(const ErrorSeries& series, double exponent_a, double ln_correction_power = 0);
// Least squares of ln(error) on ln N; the raw slope is the power-law exponent.
RateFit fit_power_law(const ErrorSeries& series);
// Plain least squares y = intercept + slope x (slope not negated).
RateFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace ergo
