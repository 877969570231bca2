#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <vector>

#include "ergo/parallel.hpp"
#include "ergo/real.hpp"

namespace ergo {

// two_pi: distance to 2 pi Z, in [0, pi]. unit: distance to Z, in [0, 1/2].
enum class TorusConvention { two_pi, unit };

Real torus_norm(const Real& x, TorusConvention convention, const Precision& precision = {});

// ||k . rho|| on the unit torus, dot product at full precision.
Real small_divisor(std::span<const long> k, std::span<const Real> rho, const Precision& precision = {});

using BigInt = boost::multiprecision::cpp_int;

struct ContinuedFraction {
  std::vector<BigInt> quotients;  // a0; a1, a2, ...
  std::vector<BigInt> p;          // convergent numerators
  std::vector<BigInt> q;          // convergent denominators
  bool exhausted = false;         // expansion ended because x is (numerically) rational
  bool partial = false;           // precision ran out before the requested terms
};

ContinuedFraction continued_fraction(const Real& x, int terms, const Precision& precision = {});
ContinuedFraction continued_fraction(long num, long den, int terms);

struct NonresonanceScan {
  int d = 1;
  std::vector<Real> rho;
  double zeta = 0;
  long K_max = 1;
  Real alpha_estimate;
  std::vector<long> argmin;
};

// Minimum over 0 < |k|_inf <= K_max (one of each +-k pair) of
// |k|^d ln^zeta(1 + |k|) ||k . rho||, |k| Euclidean.
NonresonanceScan nonresonance_scan(std::span<const Real> rho, double zeta, long K_max,
                                   const Precision& precision = {}, Execution exec = Execution::parallel);

// High-precision presets: "golden" ((sqrt5 - 1)/2), "golden_phi" ((1 + sqrt5)/2),
// "sqrt2", "inv_pi", "3/(2pi)"; anything else is parsed as a decimal or p/q.
Real parse_rotation(std::string_view text, Bits bits);

}  // namespace ergo
