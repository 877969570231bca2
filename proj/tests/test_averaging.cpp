#include <stdexcept>
#include <vector>

#include "ergo/averaging.hpp"
#include "helpers.hpp"

using namespace ergo;
using testing::R;

namespace {

const DecayingWaveSpec wave231{Real(2), Real(3), Real(1)};

}  // namespace

TEST_SUITE("averaging") {
  TEST_CASE("weighted decaying wave at N = 100 and 1000") {
    const Precision p;
    PrecisionScope s(256);
    const auto w = WeightSpec::canonical();
    const TermFunction f = [&](long n) { return decaying_wave_term(wave231, n, p); };
    CHECK(testing::rel_close(weighted_average(w, f, 100, p), R("2.0359313524932512221148233527e-15"), 1e-25));
    CHECK(testing::rel_close(weighted_average(w, f, 1000, p), R("2.1149809758800481229873227459e-47"), 1e-25));
  }

  TEST_CASE("uniform weight reduces to the Birkhoff average") {
    const Precision p;
    PrecisionScope s(256);
    const TermFunction f = [](long n) { return Real(n); };
    CHECK(weighted_average(WeightSpec::uniform(), f, 10, p) == Real(4.5));
    CHECK(unweighted_average(f, 10, p) == Real(4.5));
  }

  TEST_CASE("unweighted law N DW_N") {
    const Precision p;
    PrecisionScope s(256);
    const Real coeff = dw_leading_coefficient(wave231, p);
    CHECK(testing::rel_close(coeff, R("0.74986232212606"), 1e-13));
    CHECK(testing::rel_close(dw_leading_numerator(wave231, p).to_double(), 0.96, 0.01));
    const TermFunction f = [&](long n) { return decaying_wave_term(wave231, n, p); };
    for (long N : {30L, 100L, 1000L}) CHECK(abs(Real(N) * unweighted_average(f, N, p) - coeff) < Real(1e-6));
  }

  TEST_CASE("continuous averages") {
    const Precision p;
    PrecisionScope s(256);
    const QuadratureConfig c;
    for (double T : {1.0, 10.0, 25.0}) {
      const Real closed = continuous_unweighted_closed_form(wave231, Real(T), p);
      const Real quad = continuous_unweighted_quadrature(wave231, Real(T), c, p);
      CHECK(abs(closed - quad) <= Real(c.relative_tolerance) * abs(closed) + precision_floor(256));
    }
    CHECK(testing::rel_close(continuous_leading_coefficient(wave231, p), R("0.2541422220938625"), 1e-15));
    const Real T = Real(400);
    CHECK(abs(T * continuous_unweighted_closed_form(wave231, T, p) - continuous_leading_coefficient(wave231, p)) <
          Real(1e-12));
    const Real v = continuous_weighted_average(WeightSpec::canonical(), wave231, Real(16), c, p);
    CHECK(abs(v) < Real(1e-5));
  }

  TEST_CASE("error series validation") {
    const Precision p;
    const Problem prob = wave_problem(WeightSpec::canonical(), wave231);
    CHECK_THROWS_AS(error_series(prob, std::vector<double>{}, p), ParameterError);
    CHECK_THROWS_AS(error_series(prob, std::vector<double>{100, 50}, p), ParameterError);
    CHECK_THROWS_AS(error_series(prob, std::vector<double>{1.5, 4}, p), ParameterError);
    CHECK_THROWS_AS(error_series(prob, std::vector<double>{1, 4}, p), ParameterError);
    const ErrorSeries s = error_series(prob, std::vector<double>{100, 400}, p);
    REQUIRE(s.entries.size() == 2);
    CHECK(s.entries[0].extent == 100);
    CHECK(s.entries[1].error < s.entries[0].error);
    CHECK_FALSE(s.entries[0].at_precision_floor);
  }

  TEST_CASE("precision floor flag") {
    const Precision p = Precision::with_bits(64);
    const ErrorSeries s = error_series(wave_problem(WeightSpec::canonical(), wave231), std::vector<double>{100, 1000}, p);
    CHECK(s.entries[1].at_precision_floor);
  }

  TEST_CASE("a failing entry keeps the earlier ones") {
    const Precision p;
    Problem prob;
    prob.descriptor = "synthetic";
    prob.evaluate = [](double extent, const Precision& pr) -> AverageResult {
      if (extent > 5) throw DegenerateWeightError("boom");
      return make_result(extent, Real(1) / Real(extent), Real(0), pr.mantissa_bits);
    };
    try {
      error_series(prob, std::vector<double>{2, 4, 8, 16}, p);
      FAIL("expected SeriesError");
    } catch (const SeriesError& e) {
      CHECK(e.partial().entries.size() == 2);
      CHECK_THROWS_AS(std::rethrow_exception(e.cause()), DegenerateWeightError);
    }
  }

  TEST_CASE("orbit averages") {
    const Precision p;
    PrecisionScope s(256);
    LinearSystemSpec lin{1, {exp(Real(-2))}, {Real(1)}};
    const ErrorSeries es = error_series(linear_orbit_problem(WeightSpec::canonical(), lin), std::vector<double>{100}, p);
    // The orbit of x -> e^-2 x is the wave with lambda = 2, rho = 0, theta = pi/2.
    const DecayingWaveSpec same{Real(2), Real(0), pi(256) / 2};
    const Real direct = weighted_average(
        WeightSpec::canonical(), [&](long n) { return decaying_wave_term(same, n, p); }, 100, p);
    CHECK(testing::rel_close(es.entries[0].value, direct, 1e-60));
    const Problem bad = map_orbit_problem(
        WeightSpec::canonical(), "diverging", [](const Precision& pr) { return quadratic_step(Real(0.5), Real(10), pr); },
        {Real(1)}, Real(10));
    CHECK_THROWS_AS(error_series(bad, std::vector<double>{100}, p), SeriesError);
  }
}
