#pragma once

#include <cmath>
#include <stdexcept>

#include "clawlab/fields.hpp"
#include "clawlab/piecewise_constant.hpp"
#include "clawlab/quadrature.hpp"

namespace clawlab {

namespace detail {

inline void checkKernelBox(const PiecewiseConstantFn& u, const Kernel& W, double x) {
  if (u.empty()) return;
  auto [lo, hi] = u.hull();
  // the kernel is evaluated at x - y for y in the hull of u
  if (!W.box.containsX(x - hi) || !W.box.containsX(x - lo))
    throw std::domain_error("kernel convolution: position outside validity box of '" +
                            W.name + "'");
}

}  // namespace detail

/// (∂xW * u)(t, x) for a step function u. Exact via the antiderivative
/// identity ∫_cell ∂xW(t, x-y) dy = W(t, x-a) - W(t, x-b) whenever the
/// preset supplies one (all catalogued kernels do); Gauss-Legendre order 5
/// per cell otherwise.
inline double kernel_convolution_dx(const PiecewiseConstantFn& u, const Kernel& W, double t,
                                    double x) {
  if (W.isZero || u.empty()) return 0.0;
  detail::checkKernelBox(u, W, x);
  const auto& b = u.breakpoints();
  const auto& v = u.values();
  double acc = 0.0;
  if (W.hasAntiderivative) {
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k] != 0.0) acc += v[k] * (W.value(t, x - b[k]) - W.value(t, x - b[k + 1]));
  } else {
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k] != 0.0)
        acc += v[k] * gl5([&](double y) { return W.dx(t, x - y); }, b[k], b[k + 1]);
  }
  return acc;
}

/// (∂x²W * u)(t, x); the antiderivative of ∂x²W in the spatial argument is ∂xW.
inline double kernel_convolution_dxx(const PiecewiseConstantFn& u, const Kernel& W, double t,
                                     double x) {
  if (W.isZero || u.empty()) return 0.0;
  detail::checkKernelBox(u, W, x);
  const auto& b = u.breakpoints();
  const auto& v = u.values();
  double acc = 0.0;
  if (W.hasAntiderivative) {
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k] != 0.0) acc += v[k] * (W.dx(t, x - b[k]) - W.dx(t, x - b[k + 1]));
  } else {
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k] != 0.0)
        acc += v[k] * gl5([&](double y) { return W.dxx(t, x - y); }, b[k], b[k + 1]);
  }
  return acc;
}

}  // namespace clawlab
