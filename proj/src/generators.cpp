#include "ergo/generators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace ergo {

namespace {

Real reduce_two_pi(const Real& x, Bits bits) {
  const Real period = two_pi(bits);
  return x - period * floor(x / period);
}

Real decay(const Real& lambda, long n) { return exp(-lambda * Real(n)); }

}  // namespace

void DecayingWaveSpec::validate() const {
  if (!(lambda > Real(0)) || !lambda.is_finite()) throw ParameterError("lambda must be positive");
  if (!rho.is_finite() || !theta.is_finite()) throw ParameterError("rho and theta must be finite");
}

void SuperpositionSpec::validate() const {
  if (components.empty()) throw ParameterError("superposition needs at least one component");
  for (const auto& c : components) {
    if (!c.c.is_finite()) throw ParameterError("component coefficients must be finite");
    DecayingWaveSpec{c.lambda, c.rho, theta}.validate();
  }
}

ObservableSpec ObservableSpec::trig(Real c0, std::vector<Real> a, std::vector<Real> b) {
  ObservableSpec o;
  o.kind = ObservableKind::trig_poly;
  o.c0 = std::move(c0);
  o.a = std::move(a);
  o.b = std::move(b);
  o.validate();
  return o;
}

ObservableSpec ObservableSpec::constant(Real c) { return trig(std::move(c), {Real(0)}, {Real(0)}); }

ObservableSpec ObservableSpec::poisson(Real q) {
  ObservableSpec o;
  o.kind = ObservableKind::poisson_kernel;
  o.q = std::move(q);
  o.validate();
  return o;
}

ObservableSpec ObservableSpec::gaussian(int k_tail) {
  ObservableSpec o;
  o.kind = ObservableKind::gaussian_fourier;
  o.k_tail = k_tail;
  o.validate();
  return o;
}

ObservableSpec ObservableSpec::polynomial(std::vector<Real> coefficients) {
  ObservableSpec o;
  o.kind = ObservableKind::poly_compose;
  o.poly = std::move(coefficients);
  o.validate();
  return o;
}

ObservableSpec ObservableSpec::kappa(Real M, int tau, KappaRule rule) {
  ObservableSpec o;
  o.kind = ObservableKind::kappa_compose;
  o.M = std::move(M);
  o.tau = tau;
  o.rule = rule;
  o.validate();
  return o;
}

ObservableSpec ObservableSpec::kappa_custom(Real M, int tau, std::function<Real(const Real&)> f) {
  ObservableSpec o;
  o.kind = ObservableKind::kappa_compose;
  o.M = std::move(M);
  o.tau = tau;
  o.rule = KappaRule::custom;
  o.custom = std::move(f);
  o.validate();
  return o;
}

void ObservableSpec::validate() const {
  switch (kind) {
    case ObservableKind::trig_poly:
      if (order() < 1) throw SpecificationError("trig polynomial needs order >= 1");
      break;
    case ObservableKind::poisson_kernel:
      if (!(q > Real(0) && q < Real(1))) throw SpecificationError("poisson q must lie in (0,1)");
      break;
    case ObservableKind::gaussian_fourier:
      if (k_tail < 0) throw SpecificationError("gaussian k_tail must be nonnegative");
      break;
    case ObservableKind::poly_compose:
      if (poly.empty()) throw SpecificationError("polynomial needs coefficients");
      break;
    case ObservableKind::kappa_compose:
      if (!(M > Real(0))) throw SpecificationError("kappa M must be positive");
      if (tau < 1) throw SpecificationError("kappa tau must be a positive integer");
      if (rule == KappaRule::custom && !custom) throw SpecificationError("custom kappa rule needs a function");
      break;
  }
}

std::string ObservableSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ObservableKind::trig_poly: os << "trig_poly:order=" << order(); break;
    case ObservableKind::poisson_kernel: os << "poisson_kernel:q=" << q.to_string(17); break;
    case ObservableKind::gaussian_fourier: os << "gaussian_fourier"; break;
    case ObservableKind::poly_compose: os << "poly_compose:degree=" << poly.size() - 1; break;
    case ObservableKind::kappa_compose: os << "kappa_compose:tau=" << tau; break;
  }
  return os.str();
}

void TorusRotationSpec::validate() const {
  if (d < 1) throw ParameterError("torus dimension must be at least 1");
  if (rho.size() != static_cast<std::size_t>(d) || theta0.size() != static_cast<std::size_t>(d))
    throw ParameterError("rho and theta0 must have d components");
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!rho[i].is_finite() || !theta0[i].is_finite()) throw ParameterError("rotation data must be finite");
}

std::vector<double> LinearSystemSpec::eigenvalue_moduli() const {
  if (d < 1 || A.size() != static_cast<std::size_t>(d) * d) throw ParameterError("matrix must be d x d");
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = A[static_cast<std::size_t>(i) * d + j].to_double();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  std::vector<double> out;
  for (int i = 0; i < d; ++i) out.push_back(std::abs(solver.eigenvalues()[i]));
  return out;
}

double LinearSystemSpec::spectral_radius() const {
  double r = 0;
  for (double v : eigenvalue_moduli()) r = std::max(r, v);
  return r;
}

void LinearSystemSpec::validate() const {
  if (x0.size() != static_cast<std::size_t>(d)) throw ParameterError("x0 must have d components");
  if (!(margin >= 0 && margin < 1)) throw ParameterError("margin must lie in [0,1)");
  if (!(spectral_radius() < 1 - margin))
    throw ParameterError("eigenvalues must lie strictly inside the unit circle");
}

Real decaying_wave_term(const DecayingWaveSpec& spec, long n, const Precision& precision) {
  if (n < 0) throw ParameterError("n must be nonnegative");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  Real phase = reduce_two_pi(spec.theta.rounded(bits) + Real(n) * spec.rho, bits);
  return decay(spec.lambda, n) * sin(phase);
}

Real superposition_term(const SuperpositionSpec& spec, long n, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  std::vector<Real> parts;
  for (std::size_t k = 0; k < spec.components.size(); ++k)
    parts.push_back(spec.components[k].c * decaying_wave_term(spec.wave(k), n, precision));
  return sum_ordered(parts, precision);
}

Real trig_poly_value(const ObservableSpec& obs, const Real& x, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  std::vector<Real> parts{obs.c0};
  for (int k = 1; k <= obs.order(); ++k) {
    Real s, c;
    sin_cos(x * k, s, c);
    if (static_cast<std::size_t>(k) <= obs.a.size()) parts.push_back(obs.a[k - 1] * c);
    if (static_cast<std::size_t>(k) <= obs.b.size()) parts.push_back(obs.b[k - 1] * s);
  }
  return sum_ordered(parts, precision);
}

Real poly_value(const ObservableSpec& obs, const Real& x, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  Real acc = Real::zero(precision.mantissa_bits);
  for (auto it = obs.poly.rbegin(); it != obs.poly.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Real kappa_value(const ObservableSpec& obs, const Real& x, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  const long two_tau = 2L * obs.tau;
  switch (obs.rule) {
    case KappaRule::power:
      return obs.M * pow(x, two_tau);
    case KappaRule::signed_power:
      return obs.M * pow(x, two_tau) * Real(x.sign());
    case KappaRule::oscillating:
      if (x.is_zero()) return Real(0);
      return obs.M * pow(x, two_tau) * sin(1 / x);
    case KappaRule::custom:
      return obs.custom(x);
  }
  return Real(0);
}

int gaussian_tail(const ObservableSpec& obs, Bits bits) {
  if (obs.k_tail > 0) return obs.k_tail;
  // Smallest K with e^{-(K+1)^2} below 2^-(bits+8).
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(bits + 8) * std::log(2.0))));
}

namespace {

// One-dimensional factor g(t) on the unit torus, mean zero.
Real torus_factor(const ObservableSpec& obs, const Real& t, const Precision& precision) {
  const Bits bits = precision.mantissa_bits;
  const Real angle = two_pi(bits) * t;
  switch (obs.kind) {
    case ObservableKind::trig_poly:
      return trig_poly_value(obs, angle, precision);
    case ObservableKind::poisson_kernel: {
      const Real q2 = obs.q * obs.q;
      return (1 - q2) / (1 - 2 * obs.q * cos(angle) + q2) - 1;
    }
    case ObservableKind::gaussian_fourier: {
      std::vector<Real> parts;
      const int K = gaussian_tail(obs, bits);
      for (int k = 1; k <= K; ++k) parts.push_back(2 * exp(Real(-k * k)) * cos(angle * k));
      return sum_ordered(parts, precision);
    }
    default:
      throw SpecificationError("not a torus observable: " + obs.describe());
  }
}

}  // namespace

Real composed_term(const DecayingWaveSpec& wave, const ObservableSpec& obs, long n, const Precision& precision) {
  if (n < 0) throw ParameterError("n must be nonnegative");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  switch (obs.kind) {
    case ObservableKind::trig_poly: {
      Real phase = reduce_two_pi(wave.theta.rounded(bits) + Real(n) * wave.rho, bits);
      return decay(wave.lambda, n) * trig_poly_value(obs, phase, precision);
    }
    case ObservableKind::poisson_kernel:
    case ObservableKind::gaussian_fourier: {
      Real t = frac(wave.theta.rounded(bits) + Real(n) * wave.rho);
      return decay(wave.lambda, n) * torus_factor(obs, t, precision);
    }
    case ObservableKind::poly_compose:
      return poly_value(obs, decaying_wave_term(wave, n, precision), precision);
    case ObservableKind::kappa_compose:
      return kappa_value(obs, decaying_wave_term(wave, n, precision), precision);
  }
  throw SpecificationError("unknown observable kind");
}

Real composed_limit(const ObservableSpec& obs, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  switch (obs.kind) {
    case ObservableKind::poly_compose:
      return obs.poly.front();
    case ObservableKind::kappa_compose:
      return kappa_value(obs, Real(0), precision);
    default:
      return Real(0);
  }
}

State torus_orbit_point(const TorusRotationSpec& spec, long n, const Precision& precision) {
  if (n < 0) throw ParameterError("n must be nonnegative");
  PrecisionScope scope(precision.mantissa_bits);
  State out;
  out.reserve(spec.rho.size());
  for (std::size_t i = 0; i < spec.rho.size(); ++i)
    out.push_back(frac(spec.theta0[i].rounded(precision.mantissa_bits) + Real(n) * spec.rho[i]));
  return out;
}

Real evaluate_observable(const ObservableSpec& obs, std::span<const Real> theta, const Precision& precision) {
  if (!obs.is_torus_observable()) throw SpecificationError("not a torus observable: " + obs.describe());
  if (theta.empty()) throw ParameterError("empty torus point");
  PrecisionScope scope(precision.mantissa_bits);
  if (theta.size() == 1) return torus_factor(obs, theta[0], precision);
  if (obs.kind == ObservableKind::trig_poly) {
    std::vector<Real> parts{obs.c0};
    for (const Real& t : theta) parts.push_back(torus_factor(obs, t, precision) - obs.c0);
    return sum_ordered(parts, precision);
  }
  Real prod = 1;
  for (const Real& t : theta) prod *= 1 + torus_factor(obs, t, precision);
  return prod - 1;
}

Real exact_mean(const ObservableSpec& obs, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  switch (obs.kind) {
    case ObservableKind::trig_poly:
      return obs.c0.rounded(precision.mantissa_bits);
    case ObservableKind::poisson_kernel:
    case ObservableKind::gaussian_fourier:
      return Real(0);
    default:
      throw SpecificationError("observable has no torus mean: " + obs.describe());
  }
}

std::vector<State> map_orbit(const StepMap& step, const State& x0, long n, const Real& bound) {
  if (n < 0) throw ParameterError("orbit length must be nonnegative");
  std::vector<State> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  orbit.push_back(x0);
  for (long k = 1; k <= n; ++k) {
    State next = step(orbit.back());
    for (const Real& v : next)
      if (!v.is_finite() || abs(v) > bound)
        throw DivergenceError("orbit left the bounding box at step " + std::to_string(k));
    orbit.push_back(std::move(next));
  }
  return orbit;
}

StepMap linear_step(const LinearSystemSpec& spec, const Precision& precision) {
  spec.validate();
  return [spec, precision](const State& x) {
    PrecisionScope scope(precision.mantissa_bits);
    State y;
    for (int i = 0; i < spec.d; ++i) {
      std::vector<Real> row;
      for (int j = 0; j < spec.d; ++j) row.push_back(spec.A[static_cast<std::size_t>(i) * spec.d + j] * x[j]);
      y.push_back(sum_ordered(row, precision));
    }
    return y;
  };
}

StepMap quadratic_step(const Real& a, const Real& b, const Precision& precision) {
  return [a, b, precision](const State& x) {
    PrecisionScope scope(precision.mantissa_bits);
    State y;
    for (const Real& v : x) y.push_back(a * v + b * v * v);
    return y;
  };
}

}  // namespace ergo
