#include <omp.h>

#include <vector>

#include "ergo/averaging.hpp"
#include "ergo/smalldiv.hpp"
#include "helpers.hpp"

using namespace ergo;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("weighted averages are bit-identical across execution modes") {
    const Threads t(4);
    const Precision p;
    PrecisionScope s(256);
    const DecayingWaveSpec w{Real(2), Real(3), Real(1)};
    const TermFunction f = [&](long n) { return decaying_wave_term(w, n, p); };
    for (long N : {100L, 777L}) {
      const Real a = weighted_average(WeightSpec::canonical(), f, N, p, Execution::serial);
      const Real b = weighted_average(WeightSpec::canonical(), f, N, p, Execution::parallel);
      CHECK(a == b);
    }
  }

  TEST_CASE("quadrature is bit-identical across execution modes") {
    const Threads t(4);
    const Precision p;
    PrecisionScope s(256);
    const RealFunction f = [&](const Real& x) { return eval_kernel(WeightSpec::canonical(), x, p); };
    CHECK(integrate(f, Real(0), Real(1), {}, p, Execution::serial) ==
          integrate(f, Real(0), Real(1), {}, p, Execution::parallel));
  }

  TEST_CASE("nonresonance scan is identical across execution modes") {
    const Threads t(4);
    const Precision p;
    const std::vector<Real> rho = {parse_rotation("golden", 256), parse_rotation("sqrt2", 256)};
    const auto a = nonresonance_scan(rho, 2, 15, p, Execution::serial);
    const auto b = nonresonance_scan(rho, 2, 15, p, Execution::parallel);
    CHECK(a.alpha_estimate == b.alpha_estimate);
    CHECK(a.argmin == b.argmin);
  }

  TEST_CASE("the lowest failing index is reported") {
    const Threads t(4);
    try {
      tabulate(64, 128, Execution::parallel, [](std::size_t i) -> Real {
        if (i >= 10) throw DomainError("index " + std::to_string(i));
        return Real(static_cast<long>(i));
      });
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()) == "index 10");
    }
  }

  TEST_CASE("workers use the requested precision") {
    const Threads t(4);
    const auto v = tabulate(16, 200, Execution::parallel, [](std::size_t) { return Real(1) / 3; });
    for (const Real& x : v) CHECK(x.bits() == 200);
  }
}
