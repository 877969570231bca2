#include <benchmark/benchmark.h>

#include "ergo/averaging.hpp"
#include "ergo/smalldiv.hpp"

namespace {

using namespace ergo;

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_WeightedAverage(benchmark::State& state) {
  const Precision p;
  PrecisionScope scope(p.mantissa_bits);
  const DecayingWaveSpec wave{Real(2), Real(3), Real(1)};
  const TermFunction term = [&](long n) { return decaying_wave_term(wave, n, p); };
  for (auto _ : state)
    benchmark::DoNotOptimize(weighted_average(WeightSpec::canonical(), term, state.range(1), p, mode(state)));
}
BENCHMARK(BM_WeightedAverage)->ArgsProduct({{0, 1}, {1000, 4000}})->Unit(benchmark::kMillisecond);

void BM_Integrate(benchmark::State& state) {
  const Precision p;
  PrecisionScope scope(p.mantissa_bits);
  const WeightSpec w = WeightSpec::canonical();
  const RealFunction f = [&](const Real& x) { return eval_kernel(w, x, p); };
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_fixed(f, Real(0), Real(1), 64, 24, p, mode(state)));
}
BENCHMARK(BM_Integrate)->ArgsProduct({{0, 1}, {0}})->Unit(benchmark::kMillisecond);

void BM_NonresonanceScan(benchmark::State& state) {
  const Precision p;
  PrecisionScope scope(p.mantissa_bits);
  const std::vector<Real> rho = {parse_rotation("golden", p.mantissa_bits), parse_rotation("sqrt2", p.mantissa_bits)};
  for (auto _ : state) benchmark::DoNotOptimize(nonresonance_scan(rho, 2.5, state.range(1), p, mode(state)));
}
BENCHMARK(BM_NonresonanceScan)->ArgsProduct({{0, 1}, {20, 60}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
