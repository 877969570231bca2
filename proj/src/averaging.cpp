#include "ergo/averaging.hpp"

#include <cmath>

namespace ergo {

AverageResult make_result(double extent, Real value, Real reference, Bits bits) {
  AverageResult r;
  r.extent = extent;
  r.error = abs(value - reference);
  r.value = std::move(value);
  r.reference = std::move(reference);
  r.bits = bits;
  r.at_precision_floor = r.error < precision_floor(bits);
  return r;
}

Real weighted_average(const WeightSpec& weight, const TermFunction& term, long N, const Precision& precision,
                      Execution exec) {
  if (N < 1) throw ParameterError("N must be positive");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  std::vector<Real> w = weight_table(weight, N, precision, exec);
  Real a = sum_ordered(w, precision);
  if (a.is_zero()) throw DegenerateWeightError("A_N = 0 for N = " + std::to_string(N) + " (" + weight.describe() + ")");
  std::vector<Real> terms = tabulate(static_cast<std::size_t>(N), bits, exec, [&](std::size_t n) {
    if (w[n].is_zero()) return Real::zero(bits);
    return w[n] * term(static_cast<long>(n));
  });
  return sum_ordered(terms, precision) / a;
}

Real unweighted_average(const TermFunction& term, long N, const Precision& precision, Execution exec) {
  if (N < 1) throw ParameterError("N must be positive");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  std::vector<Real> terms =
      tabulate(static_cast<std::size_t>(N), bits, exec, [&](std::size_t n) { return term(static_cast<long>(n)); });
  return sum_ordered(terms, precision) / Real(N);
}

Real dw_leading_numerator(const DecayingWaveSpec& spec, const Precision& precision) {
  spec.validate();
  PrecisionScope scope(precision.mantissa_bits);
  const Real e = exp(-spec.lambda);
  return e * sin(spec.rho - spec.theta) + sin(spec.theta);
}

Real dw_leading_coefficient(const DecayingWaveSpec& spec, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  const Real e = exp(-spec.lambda);
  Real s, c;
  sin_cos(spec.rho, s, c);
  return dw_leading_numerator(spec, precision) / (sqr(1 - e * c) + sqr(e * s));
}

AverageResult weighted_birkhoff(const WeightSpec& weight, const TorusRotationSpec& rotation, const ObservableSpec& obs,
                                long N, const Precision& precision, Execution exec) {
  rotation.validate();
  obs.validate();
  if (N < 2) throw ParameterError("N must be at least 2");
  PrecisionScope scope(precision.mantissa_bits);
  Real value = weighted_average(
      weight,
      [&](long n) { return evaluate_observable(obs, torus_orbit_point(rotation, n, precision), precision); }, N,
      precision, exec);
  return make_result(static_cast<double>(N), value, exact_mean(obs, precision), precision.mantissa_bits);
}

Real continuous_weighted_average(const WeightSpec& weight, const RealFunction& signal, const Real& T,
                                 const QuadratureConfig& config, const Precision& precision) {
  if (!(T > Real(0))) throw ParameterError("T must be positive");
  PrecisionScope scope(precision.mantissa_bits);
  const Real Z = normalizer(weight, precision);
  // t = T z maps the window onto [0, 1].
  auto integrand = [&](const Real& z) {
    Real w = eval_kernel(weight, z, precision);
    if (w.is_zero()) return w;
    return w * signal(T * z);
  };
  return integrate(integrand, Real(0), Real(1), config, precision) / Z;
}

Real continuous_weighted_average(const WeightSpec& weight, const DecayingWaveSpec& wave, const Real& T,
                                 const QuadratureConfig& config, const Precision& precision) {
  wave.validate();
  return continuous_weighted_average(
      weight, [&](const Real& t) { return exp(-wave.lambda * t) * sin(wave.theta + wave.rho * t); }, T, config,
      precision);
}

Real continuous_unweighted_closed_form(const DecayingWaveSpec& wave, const Real& T, const Precision& precision) {
  wave.validate();
  if (!(T > Real(0))) throw ParameterError("T must be positive");
  PrecisionScope scope(precision.mantissa_bits);
  const Complex rate(-wave.lambda, wave.rho);
  const Complex one(Real(1));
  const Complex num = polar(Real(1), wave.theta) * (one - exp(rate * T));
  const Complex den(wave.lambda, -wave.rho);
  return (num / den).im / T;
}

Real continuous_unweighted_quadrature(const DecayingWaveSpec& wave, const Real& T, const QuadratureConfig& config,
                                      const Precision& precision) {
  wave.validate();
  if (!(T > Real(0))) throw ParameterError("T must be positive");
  PrecisionScope scope(precision.mantissa_bits);
  auto f = [&](const Real& z) {
    const Real t = T * z;
    return exp(-wave.lambda * t) * sin(wave.theta + wave.rho * t);
  };
  return integrate(f, Real(0), Real(1), config, precision);
}

Real continuous_leading_coefficient(const DecayingWaveSpec& wave, const Precision& precision) {
  PrecisionScope scope(precision.mantissa_bits);
  Real s, c;
  sin_cos(wave.theta, s, c);
  return (wave.lambda * s + wave.rho * c) / (sqr(wave.lambda) + sqr(wave.rho));
}

ErrorSeries error_series(const Problem& problem, std::span<const double> extents, const Precision& precision) {
  precision.validate();
  if (extents.empty()) throw ParameterError("empty schedule");
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (!(extents[i] > 0) || !std::isfinite(extents[i])) throw ParameterError("schedule entries must be positive");
    if (problem.integer_extent && (extents[i] < 2 || extents[i] != std::floor(extents[i])))
      throw ParameterError("schedule entries must be integers >= 2");
    if (i > 0 && !(extents[i] > extents[i - 1])) throw ParameterError("schedule must be strictly increasing");
  }
  ErrorSeries series{problem.descriptor, problem.weight, precision.mantissa_bits, {}};
  for (double extent : extents) {
    try {
      series.entries.push_back(problem.evaluate(extent, precision));
    } catch (const std::exception& e) {
      throw SeriesError(std::string("entry ") + std::to_string(extent) + " failed: " + e.what(), series,
                        std::current_exception());
    }
  }
  return series;
}

namespace {

long as_count(double extent) { return static_cast<long>(extent); }

}  // namespace

Problem wave_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, Execution exec) {
  wave.validate();
  weight.validate();
  Problem p;
  p.descriptor = "decaying_wave";
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    Real v = weighted_average(
        weight, [&](long n) { return decaying_wave_term(wave, n, precision); }, as_count(extent), precision, exec);
    return make_result(extent, v, Real::zero(precision.mantissa_bits), precision.mantissa_bits);
  };
  return p;
}

Problem superposition_problem(const WeightSpec& weight, const SuperpositionSpec& spec, Execution exec) {
  spec.validate();
  weight.validate();
  Problem p;
  p.descriptor = "superposition";
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    Real v = weighted_average(
        weight, [&](long n) { return superposition_term(spec, n, precision); }, as_count(extent), precision, exec);
    return make_result(extent, v, Real::zero(precision.mantissa_bits), precision.mantissa_bits);
  };
  return p;
}

Problem composed_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, const ObservableSpec& obs,
                         Execution exec) {
  wave.validate();
  obs.validate();
  weight.validate();
  Problem p;
  p.descriptor = "composed:" + obs.describe();
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    Real v = weighted_average(
        weight, [&](long n) { return composed_term(wave, obs, n, precision); }, as_count(extent), precision, exec);
    return make_result(extent, v, composed_limit(obs, precision), precision.mantissa_bits);
  };
  return p;
}

Problem quasi_periodic_problem(const WeightSpec& weight, const TorusRotationSpec& rotation, const ObservableSpec& obs,
                               Execution exec) {
  rotation.validate();
  obs.validate();
  weight.validate();
  if (!obs.is_torus_observable()) throw SpecificationError("quasi-periodic runs need a torus observable");
  Problem p;
  p.descriptor = "quasi_periodic:" + obs.describe();
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    return weighted_birkhoff(weight, rotation, obs, as_count(extent), precision, exec);
  };
  return p;
}

Problem continuous_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, const QuadratureConfig& config) {
  wave.validate();
  weight.validate();
  Problem p;
  p.descriptor = "continuous";
  p.weight = weight.describe();
  p.integer_extent = false;
  p.evaluate = [=](double extent, const Precision& precision) {
    PrecisionScope scope(precision.mantissa_bits);
    Real v = continuous_weighted_average(weight, wave, Real(extent), config, precision);
    return make_result(extent, v, Real::zero(precision.mantissa_bits), precision.mantissa_bits);
  };
  return p;
}

namespace {

AverageResult orbit_average(const WeightSpec& weight, const StepMap& step, const State& x0, const Real& bound,
                            long N, double extent, const Precision& precision) {
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  State start;
  for (const Real& v : x0) start.push_back(v.rounded(bits));
  std::vector<State> orbit = map_orbit(step, start, N - 1, bound);
  Real worst = Real::zero(bits);
  Real signed_worst = Real::zero(bits);
  for (std::size_t i = 0; i < start.size(); ++i) {
    Real v = weighted_average(
        weight, [&](long n) { return orbit[static_cast<std::size_t>(n)][i]; }, N, precision, Execution::serial);
    if (abs(v) > worst || i == 0) {
      worst = abs(v);
      signed_worst = v;
    }
  }
  return make_result(extent, signed_worst, Real::zero(bits), bits);
}

}  // namespace

Problem linear_orbit_problem(const WeightSpec& weight, const LinearSystemSpec& spec) {
  spec.validate();
  weight.validate();
  Problem p;
  p.descriptor = "linear_orbit:d=" + std::to_string(spec.d);
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    Real bound = Real(1e6);
    for (const Real& v : spec.x0) bound = max(bound, abs(v) * 1e6);
    return orbit_average(weight, linear_step(spec, precision), spec.x0, bound, as_count(extent), extent, precision);
  };
  return p;
}

Problem map_orbit_problem(const WeightSpec& weight, const std::string& descriptor,
                          std::function<StepMap(const Precision&)> make_step, State x0, Real bound) {
  weight.validate();
  Problem p;
  p.descriptor = descriptor;
  p.weight = weight.describe();
  p.evaluate = [=](double extent, const Precision& precision) {
    return orbit_average(weight, make_step(precision), x0, bound, as_count(extent), extent, precision);
  };
  return p;
}

}  // namespace ergo
