#pragma once

#include <functional>

#include "ergo/parallel.hpp"
#include "ergo/real.hpp"

namespace ergo {

using RealFunction = std::function<Real(const Real&)>;

struct QuadratureConfig {
  int initial_panels = 16;
  int nodes_per_panel = 24;
  double relative_tolerance = 1e-30;
  int max_doublings = 10;

  void validate(const Precision& precision) const;
};

// Composite Gauss-Legendre rule on uniform panels; the panel count doubles
// until two successive refinements agree to the relative tolerance, or to the
// absolute floor 2^-(bits-40). Returns the last refinement.
Real integrate(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
               const Precision& precision, Execution exec = Execution::parallel);

struct QuadratureReport {
  Real value;
  Real previous;  // the refinement before the accepted one
  long panels = 0;
  int doublings = 0;
};

// integrate() with the refinement history.
QuadratureReport integrate_report(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
                                  const Precision& precision, Execution exec = Execution::parallel);

// One fixed rule with the given panel count, no refinement.
Real integrate_fixed(const RealFunction& f, const Real& a, const Real& b, int panels, int nodes,
                     const Precision& precision, Execution exec = Execution::parallel);

// Integral of |f|: sign changes are located on a grid of `grid` cells,
// refined by bisection, and each sign-definite piece is integrated.
Real integrate_abs(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
                   const Precision& precision, int grid = 256, Execution exec = Execution::parallel);

struct GaussRule {
  std::vector<Real> nodes;    // on [-1, 1], ascending
  std::vector<Real> weights;
};

// Cached per (order, bits); safe to call from any thread.
const GaussRule& gauss_legendre(int order, Bits bits);

}  // namespace ergo
