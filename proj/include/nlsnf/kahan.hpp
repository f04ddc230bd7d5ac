#pragma once

namespace nlsnf {

// Compensated accumulator. Norm sums feed inequality tests with tight
// tolerances, so plain summation is not good enough.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }

  double value() const { return s; }
};

}  // namespace nlsnf
