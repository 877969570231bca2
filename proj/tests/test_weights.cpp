#include "ergo/weights.hpp"
#include "helpers.hpp"

using namespace ergo;
using testing::R;

TEST_SUITE("weights") {
  TEST_CASE("spec parsing round trip") {
    for (const char* text : {"exp_pq:1,1", "exp_pq:2,3", "exp_width:4", "laskar_sin2", "poly_x1mx", "uniform"})
      CHECK(WeightSpec::parse(text).describe() == text);
    CHECK(WeightSpec::parse("exp_pq:1,1") == WeightSpec::canonical());
    CHECK_THROWS_AS(WeightSpec::parse("gauss"), ParameterError);
    CHECK_THROWS_AS(WeightSpec::parse("exp_pq:1"), ParameterError);
    CHECK_THROWS_AS(WeightSpec::parse("exp_pq:0,1"), ParameterError);
    CHECK_THROWS_AS(WeightSpec::parse("exp_width:-1"), ParameterError);
  }

  TEST_CASE("kernel values") {
    const Precision p;
    PrecisionScope s(256);
    const auto w = WeightSpec::canonical();
    CHECK(eval_kernel(w, Real(0), p).is_zero());
    CHECK(eval_kernel(w, Real(1), p).is_zero());
    CHECK(eval_kernel(w, Real(0.5), p) == exp(Real(-4)));
    CHECK(eval_kernel(w, Real(0.25), p) == eval_kernel(w, Real(0.75), p));
    CHECK(eval_kernel(WeightSpec::uniform(), Real(0.5), p) == Real(1));
    CHECK(eval_kernel(WeightSpec::uniform(), Real(1), p).is_zero());
    CHECK(eval_kernel(WeightSpec::poly_x1mx(), Real(0.5), p) == Real(0.25));
    const Real ratio = eval_kernel(WeightSpec::exp_width(4), Real(0.5), p) / eval_kernel(w, Real(0.5), p);
    CHECK(testing::rel_close(ratio, exp(Real(-12)), 1e-70));
  }

  TEST_CASE("deep underflow is exactly zero") {
    const Precision p;
    PrecisionScope s(256);
    CHECK(eval_kernel(WeightSpec::canonical(), Real(1e-6), p).is_zero());
  }

  TEST_CASE("A_N and the normalizer") {
    const Precision p;
    PrecisionScope s(256);
    const auto w = WeightSpec::canonical();
    const Real a1000 = weight_sum(w, 1000, p);
    CHECK(testing::rel_close(a1000, R("7.02985840660965623924127053035"), 1e-28));
    CHECK(testing::rel_close(normalizer(w, p), R("7.02985840660965623924127053035e-3"), 1e-28));
    CHECK_THROWS_AS(weight_sum(w, 1, p), DegenerateWeightError);
    CHECK(testing::rel_close(normalizer(WeightSpec::poly_x1mx(), p), Real::from_ratio(1, 6, 256), 1e-70));
    CHECK(testing::rel_close(normalizer(WeightSpec::laskar_sin2(), p), Real(0.5), 1e-70));
  }

  TEST_CASE("contour derivative") {
    const Precision p;
    PrecisionScope s(256);
    const auto w = WeightSpec::canonical();
    // w''(1/2) = -32 e^-4.
    CHECK(testing::rel_close(kernel_derivative(w, Real(0.5), 2, p), R("-0.586100444439493769"), 1e-17));
    // Trapezoid aliasing on radius 1/4 with the singularity at distance 1/2: about 2^-64.
    CHECK(testing::rel_close(kernel_derivative(w, Real(0.5), 2, p), Real(-32) * exp(Real(-4)), 1e-18));
    CHECK(abs(kernel_derivative(w, Real(0.5), 1, p)) < Real(1e-60));
    CHECK(kernel_derivative(w, Real(0.3), 0, p) == eval_kernel(w, Real(0.3), p));
    CHECK_THROWS_AS(kernel_derivative(w, Real(0), 1, p), ParameterError);
    CHECK_THROWS_AS(kernel_derivative(WeightSpec::uniform(), Real(0.5), 1, p), SpecificationError);
  }

  TEST_CASE("L1 decay norms") {
    const Precision p;
    PrecisionScope s(256);
    const auto w = WeightSpec::canonical();
    const QuadratureConfig c;
    CHECK(testing::rel_close(l1_decay_norm(w, 0, Real(2), 64, c, p).to_double(), 2.3368e-12, 1e-4));
    CHECK(testing::rel_close(l1_decay_norm(w, 0, Real(2), 256, c, p).to_double(), 1.2917e-22, 1e-4));
    const QuadratureConfig coarse{8, 16, 1e-12, 8};
    CHECK(testing::rel_close(l1_decay_norm(w, 1, Real(2), 64, coarse, p).to_double(), 2.99115430853818e-10, 1e-8));
    CHECK_THROWS_AS(l1_decay_norm(w, 0, Real(0), 64, c, p), ParameterError);
  }

  TEST_CASE("derivative norm growth") {
    const Precision p;
    const auto norms = derivative_norm_growth(WeightSpec::canonical(), 4, p);
    REQUIRE(norms.size() == 4);
    // ||w'||_1 = 2 w(1/2) = 2 e^-4.
    PrecisionScope s(256);
    CHECK(testing::rel_close(norms[0], 2 * exp(Real(-4)), 1e-15));
    CHECK(testing::rel_close(norms[1].to_double(), 0.3103, 1e-3));
    CHECK(testing::rel_close(norms[2].to_double(), 3.535, 1e-3));
    CHECK(testing::rel_close(norms[3].to_double(), 59.11, 1e-3));
    CHECK_THROWS_AS(derivative_norm_growth(WeightSpec::uniform(), 4, p), SpecificationError);
    CHECK_THROWS_AS(derivative_norm_growth(WeightSpec::canonical(), 1, p), ParameterError);
  }

  TEST_CASE("Phi is independent of B") {
    const Precision p;
    PrecisionScope s(256);
    const Real expected = R("4.4311346272637900682454187083528630e-1");
    for (double B : {0.0, 1.0, 5.0}) CHECK(testing::rel_close(cauchy_schlomilch_phi(Real(2), Real(B), p), expected, 1e-30));
    CHECK_THROWS_AS(cauchy_schlomilch_phi(Real(0), Real(1), p), ParameterError);
  }

  TEST_CASE("Psi identity") {
    const Precision p;
    PrecisionScope s(256);
    const PsiValues v = psi_identity(Real(0.5), Real(4), p);
    CHECK(testing::rel_close(v.quadrature, v.closed_form, 1e-30));
    CHECK(testing::rel_close(v.closed_form, R("0.0740780677626868"), 1e-14));
    const PsiValues u = psi_identity(Real(1), Real(1), p);
    CHECK(testing::rel_close(u.quadrature, R("0.119937771968061447"), 1e-17));
  }
}
