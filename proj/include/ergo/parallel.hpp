#pragma once

#include <omp.h>

#include <cstddef>
#include <exception>
#include <vector>

#include "ergo/real.hpp"

namespace ergo {

// How independent evaluations are scheduled. Reductions are always serial and
// ordered, so both modes give bit-identical results.
enum class Execution { serial, parallel };

// out[i] = f(i) for i < count. Each worker runs under the given precision.
template <class F>
std::vector<Real> tabulate(std::size_t count, Bits bits, Execution exec, F&& f) {
  std::vector<Real> out(count, Real::zero(bits));
  if (exec == Execution::serial || count < 2 || omp_in_parallel()) {
    PrecisionScope scope(bits);
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> failures(count);
  const long n = static_cast<long>(count);
#pragma omp parallel
  {
    PrecisionScope scope(bits);
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  // Report the lowest-index failure so errors do not depend on scheduling.
  for (auto& e : failures)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace ergo
