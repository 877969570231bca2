#pragma once

#include <exception>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ergo/generators.hpp"
#include "ergo/quadrature.hpp"
#include "ergo/weights.hpp"

namespace ergo {

// term(n); called concurrently, so it must be a pure function.
using TermFunction = std::function<Real(long)>;

struct AverageResult {
  double extent = 0;  // N, or T for continuous averages
  Real value;
  Real reference;
  Real error;  // |value - reference| at the working precision
  Bits bits = 0;
  bool at_precision_floor = false;
};

AverageResult make_result(double extent, Real value, Real reference, Bits bits);

// (1/A_N) sum_{n<N} w(n/N) term(n), summed in index order.
Real weighted_average(const WeightSpec& weight, const TermFunction& term, long N, const Precision& precision,
                      Execution exec = Execution::parallel);

Real unweighted_average(const TermFunction& term, long N, const Precision& precision,
                        Execution exec = Execution::parallel);

// N DW_N -> (e^{-l} sin(r - t) + sin t) / ((1 - e^{-l} cos r)^2 + (e^{-l} sin r)^2).
Real dw_leading_numerator(const DecayingWaveSpec& spec, const Precision& precision);
Real dw_leading_coefficient(const DecayingWaveSpec& spec, const Precision& precision);

AverageResult weighted_birkhoff(const WeightSpec& weight, const TorusRotationSpec& rotation, const ObservableSpec& obs,
                                long N, const Precision& precision, Execution exec = Execution::parallel);

// (1/T) int_0^T w(t/T) f(t) dt with w normalized to unit mass.
Real continuous_weighted_average(const WeightSpec& weight, const RealFunction& signal, const Real& T,
                                 const QuadratureConfig& config, const Precision& precision);
Real continuous_weighted_average(const WeightSpec& weight, const DecayingWaveSpec& wave, const Real& T,
                                 const QuadratureConfig& config, const Precision& precision);

// (1/T) int_0^T e^{-l t} sin(t + r t) dt = (1/T) Im{e^{i t}(1 - e^{(-l + i r)T}) / (l - i r)}.
Real continuous_unweighted_closed_form(const DecayingWaveSpec& wave, const Real& T, const Precision& precision);
Real continuous_unweighted_quadrature(const DecayingWaveSpec& wave, const Real& T, const QuadratureConfig& config,
                                      const Precision& precision);
// (l sin t + r cos t) / (l^2 + r^2), the limit of T DW_T.
Real continuous_leading_coefficient(const DecayingWaveSpec& wave, const Precision& precision);

// A family of averages indexed by N (or T) together with its reference.
struct Problem {
  std::string descriptor;
  std::string weight;
  bool integer_extent = true;
  std::function<AverageResult(double extent, const Precision&)> evaluate;
};

struct ErrorSeries {
  std::string problem;
  std::string weight;
  Bits bits = 0;
  std::vector<AverageResult> entries;
};

// A failed entry; carries the entries computed before it.
class SeriesError : public Error {
 public:
  SeriesError(const std::string& what, ErrorSeries partial, std::exception_ptr cause)
      : Error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}
  const ErrorSeries& partial() const { return partial_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  ErrorSeries partial_;
  std::exception_ptr cause_;
};

ErrorSeries error_series(const Problem& problem, std::span<const double> extents, const Precision& precision);

Problem wave_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, Execution exec = Execution::parallel);
Problem superposition_problem(const WeightSpec& weight, const SuperpositionSpec& spec,
                              Execution exec = Execution::parallel);
Problem composed_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, const ObservableSpec& obs,
                         Execution exec = Execution::parallel);
Problem quasi_periodic_problem(const WeightSpec& weight, const TorusRotationSpec& rotation, const ObservableSpec& obs,
                               Execution exec = Execution::parallel);
Problem continuous_problem(const WeightSpec& weight, const DecayingWaveSpec& wave, const QuadratureConfig& config);
// Orbits converge to the fixed point 0; the error is the max-norm of the averaged state.
Problem linear_orbit_problem(const WeightSpec& weight, const LinearSystemSpec& spec);
Problem map_orbit_problem(const WeightSpec& weight, const std::string& descriptor,
                          std::function<StepMap(const Precision&)> make_step, State x0, Real bound);

}  // namespace ergo
