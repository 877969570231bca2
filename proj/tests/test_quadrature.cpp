#include "ergo/quadrature.hpp"
#include "helpers.hpp"

using namespace ergo;

TEST_SUITE("quadrature") {
  TEST_CASE("trivial integrals") {
    const Precision p;
    PrecisionScope s(256);
    CHECK(abs(integrate([](const Real&) { return Real(1); }, Real(0), Real(1), {}, p) - Real(1)) <
          precision_floor(256));
    CHECK(abs(integrate([](const Real& x) { return x; }, Real(0), Real(2), {}, p) - Real(2)) <
          precision_floor(256));
  }

  TEST_CASE("Psi(1,1) closed form") {
    const Precision p;
    PrecisionScope s(256);
    auto f = [](const Real& x) { return x.is_zero() ? Real(0) : exp(-sqr(x) - Real(1) / sqr(x)); };
    const Real v = integrate(f, Real(0), Real(40), {}, p);
    const Real closed = exp(Real(-2)) * sqrt(pi(256)) / 2;
    CHECK(testing::rel_close(v, closed, 1e-28));
    CHECK(testing::rel_close(v, testing::R("0.119937771968061447"), 1e-17));
  }

  TEST_CASE("integral agrees with the oracle") {
    const Precision p;
    auto f = [](const Real& x) { return exp(-x) * sin(3 * x); };
    Real lo, hi;
    {
      PrecisionScope s(256);
      lo = integrate(f, Real(0), Real(5), {}, p);
    }
    {
      PrecisionScope s(512);
      hi = integrate(f, Real(0), Real(5), {}, p.oracle());
    }
    CHECK(oracle_agrees(lo, hi, p));
  }

  TEST_CASE("refinement errors decrease for a smooth integrand") {
    const Precision p;
    PrecisionScope s(256);
    auto f = [](const Real& x) { return exp(x); };
    const Real exact = exp(Real(1)) - 1;
    Real last = Real(1);
    for (int panels = 1, k = 0; panels <= 16; panels *= 2, ++k) {
      const Real err = abs(integrate_fixed(f, Real(0), Real(1), panels, 4, p) - exact);
      if (k >= 2) CHECK(err < last);
      last = err;
    }
  }

  TEST_CASE("non-convergence reports both iterates") {
    const Precision p;
    PrecisionScope s(256);
    QuadratureConfig c{1, 2, 1e-30, 1};
    auto f = [](const Real& x) { return abs(x - Real::from_ratio(1, 3, 256)); };
    try {
      integrate(f, Real(0), Real(1), c, p);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK_FALSE(e.previous().empty());
      CHECK_FALSE(e.last().empty());
      CHECK(e.previous() != e.last());
    }
  }

  TEST_CASE("invalid configuration") {
    const Precision p;
    CHECK_THROWS_AS((QuadratureConfig{0, 24, 1e-30, 10}.validate(p)), ParameterError);
    CHECK_THROWS_AS((QuadratureConfig{16, 24, 0, 10}.validate(p)), ParameterError);
    CHECK_THROWS_AS((QuadratureConfig{16, 24, 1e-30, 0}.validate(p)), ParameterError);
    CHECK_THROWS_AS(integrate([](const Real& x) { return x; }, Real(1), Real(0), {}, p), ParameterError);
  }

  TEST_CASE("integral of |f| splits at sign changes") {
    const Precision p;
    PrecisionScope s(256);
    const Real v = integrate_abs([](const Real& x) { return sin(x); }, Real(0), two_pi(256), {}, p);
    CHECK(abs(v - Real(4)) < Real(1e-40));
  }
}
