#pragma once

#include <cmath>

namespace piff {

// Neumaier-compensated accumulator. Polynomial evaluation over hundreds of
// monomials loses enough low-order mass with naive summation to push row sums
// of a stochastic matrix past the 1e-12 acceptance band; compensation keeps
// the error at a few ulps regardless of term count.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  double value() const { return s + c; }
};

} // namespace piff
