#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ergo/real.hpp"

namespace ergo {

// e^{-lambda n} sin(theta + n rho); rho and theta in radians.
struct DecayingWaveSpec {
  Real lambda = 1;
  Real rho = 0;
  Real theta = 0;

  void validate() const;
};

struct WaveComponent {
  Real c;
  Real lambda;
  Real rho;
};

// Waves sharing one initial phase theta.
struct SuperpositionSpec {
  std::vector<WaveComponent> components;
  Real theta = 0;

  void validate() const;
  DecayingWaveSpec wave(std::size_t k) const { return {components[k].lambda, components[k].rho, theta}; }
};

enum class ObservableKind { trig_poly, poisson_kernel, gaussian_fourier, poly_compose, kappa_compose };

// Pointwise rules for kappa compositions; all vanish at 0 and obey
// |K(x) - K(0)| <= M x^{2 tau} on [-1, 1].
enum class KappaRule { power, signed_power, oscillating, custom };

struct ObservableSpec {
  ObservableKind kind = ObservableKind::trig_poly;
  // trig_poly: c0 + sum_{n=1..l} a_n cos(n x) + b_n sin(n x)
  Real c0 = 0;
  std::vector<Real> a;
  std::vector<Real> b;
  // poisson_kernel
  Real q = 0.5;
  // gaussian_fourier; 0 picks the truncation from the precision
  int k_tail = 0;
  // poly_compose: Q_0 .. Q_nu
  std::vector<Real> poly;
  // kappa_compose
  Real M = 1;
  int tau = 1;
  KappaRule rule = KappaRule::power;
  std::function<Real(const Real&)> custom;

  static ObservableSpec trig(Real c0, std::vector<Real> a, std::vector<Real> b);
  static ObservableSpec constant(Real c);
  static ObservableSpec poisson(Real q);
  static ObservableSpec gaussian(int k_tail = 0);
  static ObservableSpec polynomial(std::vector<Real> coefficients);
  static ObservableSpec kappa(Real M, int tau, KappaRule rule = KappaRule::power);
  static ObservableSpec kappa_custom(Real M, int tau, std::function<Real(const Real&)> f);

  void validate() const;
  int order() const { return static_cast<int>(std::max(a.size(), b.size())); }
  bool is_torus_observable() const {
    return kind == ObservableKind::trig_poly || kind == ObservableKind::poisson_kernel ||
           kind == ObservableKind::gaussian_fourier;
  }
  std::string describe() const;
};

// Rotation by rho on the unit torus R^d / Z^d.
struct TorusRotationSpec {
  int d = 1;
  std::vector<Real> rho;
  std::vector<Real> theta0;

  void validate() const;
};

// x_{n+1} = A x_n with A stored row-major.
struct LinearSystemSpec {
  int d = 1;
  std::vector<Real> A;
  std::vector<Real> x0;
  double margin = 1e-9;

  // Throws unless the spectral radius is below 1 - margin.
  void validate() const;
  std::vector<double> eigenvalue_moduli() const;
  double spectral_radius() const;
};

using State = std::vector<Real>;
using StepMap = std::function<State(const State&)>;

Real decaying_wave_term(const DecayingWaveSpec& spec, long n, const Precision& precision);
Real superposition_term(const SuperpositionSpec& spec, long n, const Precision& precision);

// The trig polynomial at x (radians).
Real trig_poly_value(const ObservableSpec& obs, const Real& x, const Precision& precision);
// K(x) for a kappa observable.
Real kappa_value(const ObservableSpec& obs, const Real& x, const Precision& precision);
Real poly_value(const ObservableSpec& obs, const Real& x, const Precision& precision);

// e^{-lambda n} P(theta + n rho) for torus observables (trig on the 2 pi torus,
// Poisson and Gaussian on the unit torus), Q(wave) and K(wave) for compositions.
Real composed_term(const DecayingWaveSpec& wave, const ObservableSpec& obs, long n, const Precision& precision);
// Limit of the composed sequence: Q(0), K(0), or 0.
Real composed_limit(const ObservableSpec& obs, const Precision& precision);

State torus_orbit_point(const TorusRotationSpec& spec, long n, const Precision& precision);

// Observable on the unit torus; d > 1 uses c0 + sum_i (P(2 pi t_i) - c0) for
// trig polynomials and prod_i (1 + g(t_i)) - 1 for the Poisson and Gaussian families.
Real evaluate_observable(const ObservableSpec& obs, std::span<const Real> theta, const Precision& precision);
Real exact_mean(const ObservableSpec& obs, const Precision& precision);
int gaussian_tail(const ObservableSpec& obs, Bits bits);

// x0, F(x0), ..., F^n(x0); throws DivergenceError when the orbit leaves
// the box |x|_inf <= bound.
std::vector<State> map_orbit(const StepMap& step, const State& x0, long n, const Real& bound);
StepMap linear_step(const LinearSystemSpec& spec, const Precision& precision);
// x -> a x + b x^2 componentwise.
StepMap quadratic_step(const Real& a, const Real& b, const Precision& precision);

}  // namespace ergo
