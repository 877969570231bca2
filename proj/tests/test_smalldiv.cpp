#include <vector>

#include "ergo/smalldiv.hpp"
#include "helpers.hpp"

using namespace ergo;
using testing::R;

TEST_SUITE("smalldiv") {
  TEST_CASE("torus norms") {
    const Precision p;
    PrecisionScope s(256);
    CHECK(torus_norm(Real(3), TorusConvention::two_pi, p) == Real(3));
    CHECK(testing::rel_close(torus_norm(Real(7), TorusConvention::two_pi, p), Real(7) - two_pi(256), 1e-70));
    CHECK(testing::rel_close(torus_norm(R("0.7"), TorusConvention::unit, p), R("0.3"), 1e-70));
    CHECK(torus_norm(Real(-0.25), TorusConvention::unit, p) == Real(0.25));
  }

  TEST_CASE("small divisor") {
    const Precision p;
    PrecisionScope s(256);
    const std::vector<Real> rho = {Real(0.25), Real(0.5)};
    const std::vector<long> k = {1, 1};
    CHECK(small_divisor(k, rho, p) == Real(0.25));
    CHECK_THROWS_AS(small_divisor(std::vector<long>{0, 0}, rho, p), ParameterError);
    CHECK_THROWS_AS(small_divisor(std::vector<long>{1}, rho, p), ParameterError);
  }

  TEST_CASE("continued fractions") {
    const Precision p;
    const auto g = continued_fraction(parse_rotation("golden", 256), 20, p);
    REQUIRE(g.quotients.size() == 20);
    CHECK(g.quotients[0] == 0);
    for (std::size_t i = 1; i < g.quotients.size(); ++i) CHECK(g.quotients[i] == 1);
    CHECK(g.q[10] == 89);
    CHECK(g.p[10] == 55);

    const auto r = continued_fraction(355, 113, 10);
    CHECK(r.exhausted);
    CHECK(r.quotients == std::vector<BigInt>{3, 7, 16});

    const auto root2 = continued_fraction(parse_rotation("sqrt2", 256), 12, p);
    CHECK(root2.quotients[0] == 1);
    for (std::size_t i = 1; i < root2.quotients.size(); ++i) CHECK(root2.quotients[i] == 2);

    const auto low = continued_fraction(parse_rotation("golden", 64), 200, Precision::with_bits(64));
    CHECK(low.partial);
    CHECK(low.quotients.size() < 200);

    const auto half = continued_fraction(Real(0.5), 5, p);
    CHECK(half.exhausted);
    CHECK_THROWS_AS(continued_fraction(1, 0, 3), DomainError);
  }

  TEST_CASE("rotation presets") {
    CHECK(testing::rel_close(parse_rotation("3/(2pi)", 256).to_double(), 0.477464829275686, 1e-14));
    CHECK(parse_rotation("1/4", 256) == Real(0.25));
    CHECK(testing::rel_close(parse_rotation("inv_pi", 256).to_double(), 0.318309886183791, 1e-14));
    CHECK_THROWS_AS(parse_rotation("banana", 256), ParameterError);
  }

  TEST_CASE("nonresonance scan") {
    const Precision p;
    const std::vector<Real> golden = {parse_rotation("golden", 256)};
    const auto scan = nonresonance_scan(golden, 0, 40, p);
    CHECK(scan.d == 1);
    CHECK(scan.alpha_estimate > Real(0));
    // The best approximations of the golden mean have Fibonacci denominators.
    const long k = scan.argmin[0];
    CHECK((k == 1 || k == 2 || k == 3 || k == 5 || k == 8 || k == 13 || k == 21 || k == 34));
    const std::vector<Real> rational = {Real(0.25)};
    CHECK(nonresonance_scan(rational, 0, 8, p).alpha_estimate.is_zero());
    CHECK_THROWS_AS(nonresonance_scan(rational, 0, 0, p), ParameterError);
  }
}
