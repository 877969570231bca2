#pragma once

#include <doctest.h>

#include <cmath>
#include <string>

#include "ergo/real.hpp"

namespace testing {

inline ergo::Real R(const char* text, ergo::Bits bits = 256) { return ergo::Real::from_string(text, bits); }

// |a - b| <= tol * |b|, evaluated in extended precision.
inline bool rel_close(const ergo::Real& a, const ergo::Real& b, double tol) {
  return ergo::abs(a - b) <= ergo::Real(tol) * ergo::abs(b);
}

inline bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace testing
