#include "ergo/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace ergo {

void QuadratureConfig::validate(const Precision& precision) const {
  if (initial_panels < 1) throw ParameterError("initial_panels must be positive");
  if (nodes_per_panel < 1) throw ParameterError("nodes_per_panel must be positive");
  if (max_doublings < 1) throw ParameterError("max_doublings must be at least 1");
  if (!(relative_tolerance > 0) || !std::isfinite(relative_tolerance))
    throw ParameterError("relative_tolerance must be positive");
  if (std::log2(relative_tolerance) < -static_cast<double>(precision.mantissa_bits))
    throw ParameterError("relative_tolerance is below the working precision");
}

namespace {

GaussRule build_rule(int order, Bits bits) {
  const Bits work = bits + 32;
  PrecisionScope scope(work);
  GaussRule rule;
  rule.nodes.reserve(order);
  rule.weights.reserve(order);
  const Real tiny = ldexp(Real(1), -(work - 8));
  for (int i = order; i >= 1; --i) {
    // Newton on P_n from the standard cosine guess, giving ascending nodes.
    Real x = std::cos(M_PI * (i - 0.25) / (order + 0.5));
    Real dp = 0;
    for (int it = 0; it < 200; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= order; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = std::move(p1);
        p1 = std::move(p2);
      }
      if (order == 1) p0 = 1;
      dp = order * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= tiny) break;
    }
    Real w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes.push_back(x.rounded(bits));
    rule.weights.push_back(w.rounded(bits));
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order, Bits bits) {
  static std::mutex mutex;
  static std::map<std::pair<int, Bits>, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{order, bits}];
  if (!slot) slot = std::make_unique<GaussRule>(build_rule(order, bits));
  return *slot;
}

Real integrate_fixed(const RealFunction& f, const Real& a, const Real& b, int panels, int nodes,
                     const Precision& precision, Execution exec) {
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const GaussRule& rule = gauss_legendre(nodes, bits);
  const Real lo = a.rounded(bits);
  const Real h = (b.rounded(bits) - lo) / panels;
  const std::size_t count = static_cast<std::size_t>(panels) * nodes;
  std::vector<Real> terms = tabulate(count, bits, exec, [&](std::size_t idx) {
    const std::size_t p = idx / nodes, j = idx % nodes;
    Real x = lo + h * (Real(p) + (1 + rule.nodes[j]) / 2);
    Real fx = f(x);
    if (!fx.is_finite()) throw DomainError("integrand is not finite at " + x.to_string(20));
    return rule.weights[j] * fx;
  });
  return sum_ordered(terms, precision) * h / 2;
}

QuadratureReport integrate_report(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
                                  const Precision& precision, Execution exec) {
  precision.validate();
  config.validate(precision);
  if (!(a < b)) throw ParameterError("integration requires a < b");
  PrecisionScope scope(precision.mantissa_bits);
  const Real tol = config.relative_tolerance;
  const Real floor_value = precision_floor(precision.mantissa_bits);
  long panels = config.initial_panels;
  Real prev = integrate_fixed(f, a, b, static_cast<int>(panels), config.nodes_per_panel, precision, exec);
  for (int k = 1;; ++k) {
    panels *= 2;
    Real cur = integrate_fixed(f, a, b, static_cast<int>(panels), config.nodes_per_panel, precision, exec);
    Real diff = abs(cur - prev);
    if (diff <= tol * abs(cur) || diff <= floor_value) return {cur, prev, panels, k};
    if (k == config.max_doublings)
      throw ConvergenceError("quadrature did not converge after " + std::to_string(config.max_doublings) +
                                 " doublings",
                             prev.to_string(30), cur.to_string(30));
    prev = std::move(cur);
  }
}

Real integrate(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
               const Precision& precision, Execution exec) {
  return integrate_report(f, a, b, config, precision, exec).value;
}

Real integrate_abs(const RealFunction& f, const Real& a, const Real& b, const QuadratureConfig& config,
                   const Precision& precision, int grid, Execution exec) {
  if (!(a < b)) throw ParameterError("integration requires a < b");
  if (grid < 1) throw ParameterError("grid must be positive");
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const Real h = (b - a) / grid;
  std::vector<Real> samples = tabulate(static_cast<std::size_t>(grid) + 1, bits, exec,
                                       [&](std::size_t i) { return f(a + h * Real(i)); });
  std::vector<Real> cuts{a};
  for (int i = 0; i < grid; ++i) {
    const int s0 = samples[i].sign(), s1 = samples[i + 1].sign();
    if (s0 == 0 && i > 0) {
      cuts.push_back(a + h * Real(i));
    } else if (s0 * s1 < 0) {
      Real lo = a + h * Real(i), hi = a + h * Real(i + 1);
      for (int it = 0; it < 64; ++it) {
        Real mid = (lo + hi) / 2;
        if (f(mid).sign() == s0)
          lo = mid;
        else
          hi = mid;
      }
      cuts.push_back((lo + hi) / 2);
    }
  }
  cuts.push_back(b);
  auto absf = [&](const Real& x) { return abs(f(x)); };
  std::vector<Real> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i] < cuts[i + 1]) pieces.push_back(integrate(absf, cuts[i], cuts[i + 1], config, precision, exec));
  return sum_ordered(pieces, precision);
}

}  // namespace ergo
