#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace clawlab {

// 5-point Gauss-Legendre rule on [-1,1], exact for polynomials up to degree 9.
struct GaussLegendre5 {
  static constexpr std::array<double, 5> nodes = {
      -0.9061798459386639928, -0.5384693101056830910, 0.0,
      0.5384693101056830910, 0.9061798459386639928};
  static constexpr std::array<double, 5> weights = {
      0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889,
      0.4786286704993664680, 0.2369268850561890875};
};

/// Integrate f over [a,b] with a single 5-point Gauss-Legendre panel.
template <class F>
double gl5(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    acc += GaussLegendre5::weights[i] * f(mid + half * GaussLegendre5::nodes[i]);
  return half * acc;
}

/// Composite 5-point Gauss-Legendre over [a,b] with `panels` equal panels.
template <class F>
double gl5_composite(F&& f, double a, double b, int panels) {
  if (panels < 1) panels = 1;
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) acc += gl5(f, a + k * w, a + (k + 1) * w);
  return acc;
}

/// Trapezoid rule on a tabulated function (times strictly increasing).
inline double trapezoid(const double* t, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    acc += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
  return acc;
}

}  // namespace clawlab
