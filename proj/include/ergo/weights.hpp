#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ergo/quadrature.hpp"
#include "ergo/real.hpp"

namespace ergo {

enum class KernelKind { exp_pq, exp_width, laskar_sin2, poly_x1mx, uniform };

struct WeightSpec {
  KernelKind kind = KernelKind::exp_pq;
  double p = 1;
  double q = 1;
  double gamma = 1;

  static WeightSpec canonical() { return {}; }
  static WeightSpec exp_pq(double p, double q) { return {KernelKind::exp_pq, p, q, 1}; }
  static WeightSpec exp_width(double gamma) { return {KernelKind::exp_width, 1, 1, gamma}; }
  static WeightSpec laskar_sin2() { return {KernelKind::laskar_sin2, 1, 1, 1}; }
  static WeightSpec poly_x1mx() { return {KernelKind::poly_x1mx, 1, 1, 1}; }
  static WeightSpec uniform() { return {KernelKind::uniform, 1, 1, 1}; }

  // "exp_pq:1,1", "exp_width:4", "laskar_sin2", "poly_x1mx", "uniform".
  static WeightSpec parse(std::string_view text);
  std::string describe() const;
  void validate() const;
  bool is_exponential() const { return kind == KernelKind::exp_pq || kind == KernelKind::exp_width; }
  bool operator==(const WeightSpec&) const = default;
};

// Unnormalized kernel value, exactly zero outside the support.
Real eval_kernel(const WeightSpec& spec, const Real& x, const Precision& precision);

// Kernel continued to complex arguments (exponential kernels only).
Complex eval_kernel_complex(const WeightSpec& spec, const Complex& z, const Precision& precision);

// A_N = sum_{n<N} w(n/N), in index order.
Real weight_sum(const WeightSpec& spec, long N, const Precision& precision,
                Execution exec = Execution::parallel);

// The table w(n/N), n < N.
std::vector<Real> weight_table(const WeightSpec& spec, long N, const Precision& precision,
                               Execution exec = Execution::parallel);

// Integral of the unnormalized kernel over [0,1]; computed once per spec and precision.
Real normalizer(const WeightSpec& spec, const Precision& precision);

struct KernelValue {
  Real unnormalized;
  Real normalizer;
  Real normalized() const { return unnormalized / normalizer; }
};

KernelValue kernel_value(const WeightSpec& spec, const Real& x, const Precision& precision);

// m-th derivative by the trapezoidal rule on the Cauchy circle of radius
// min(x, 1-x)/2 with max(64, 8m) nodes.
Real kernel_derivative(const WeightSpec& spec, const Real& x, int m, const Precision& precision);

// Integral over [0,1] of |D^m w(y)| exp(-lambda N y).
Real l1_decay_norm(const WeightSpec& spec, int m, const Real& lambda, long N, const QuadratureConfig& config,
                   const Precision& precision);

// L1 norms of D^m w for m = 1..m_max.
std::vector<Real> derivative_norm_growth(const WeightSpec& spec, int m_max, const Precision& precision);

// Integral over [0, inf) of exp(-(A s - B/s)^2), truncated where the tail is negligible.
Real cauchy_schlomilch_phi(const Real& A, const Real& B, const Precision& precision,
                           const QuadratureConfig& config = {}, double cutoff_scale = 1);

struct PsiValues {
  Real quadrature;
  Real closed_form;
};

// Integral over [0, inf) of exp(-sigma s^2 - eta/s^2) and exp(-2 sqrt(sigma eta)) sqrt(pi)/(2 sqrt(sigma)).
PsiValues psi_identity(const Real& sigma, const Real& eta, const Precision& precision,
                       const QuadratureConfig& config = {});

}  // namespace ergo
