#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "clawlab/piecewise_constant.hpp"

namespace clawlab {

/// Finite-difference solution of du/dt + dx P(t,x,u) = eps * u_xx on a
/// padded uniform grid with zero-flux boundaries.
struct GridSolution {
  double xLo = 0.0, h = 0.0;
  double epsilon = 0.0;
  double dtBase = 0.0;
  double cflHyperbolic = 0.0, cflParabolic = 0.0;
  double maxSpeed = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  double initialMass = 0.0;
  double massDrift = 0.0;  // max |mass(t) - mass(0)| over stored times

  int cells() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }

  PiecewiseConstantFn sample(double t) const {
    const double tol = std::max(dtBase, 1e-12) * 1.5;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (std::abs(times[k] - t) <= tol) {
        const auto& v = values[k];
        std::vector<double> breaks(v.size() + 1);
        for (std::size_t j = 0; j < breaks.size(); ++j) breaks[j] = xLo + h * j;
        return PiecewiseConstantFn(breaks, v);
      }
    }
    throw std::invalid_argument("GridSolution::sample: no snapshot near t=" +
                                std::to_string(t));
  }
};

namespace detail {

/// Engquist-Osher split fluxes by segment decomposition between the flux's
/// critical points: exact whenever P(t,x,.) is monotone between them.
template <class Flux>
double eoPlus(const Flux& flux, double t, double x, double a) {
  // f(0) + int_0^a max(f', 0)
  double acc = flux.value(t, x, 0.0);
  const double lo = std::min(0.0, a), hi = std::max(0.0, a);
  const double sgn = (a >= 0.0) ? 1.0 : -1.0;
  double s = lo, fs = flux.value(t, x, lo);
  for (double c : flux.criticalPoints()) {
    if (c <= s || c >= hi) continue;
    const double fc = flux.value(t, x, c);
    acc += sgn * std::max(fc - fs, 0.0);
    s = c;
    fs = fc;
  }
  acc += sgn * std::max(flux.value(t, x, hi) - fs, 0.0);
  return acc;
}

template <class Flux>
double eoMinus(const Flux& flux, double t, double x, double b) {
  // int_0^b min(f', 0)
  double acc = 0.0;
  const double lo = std::min(0.0, b), hi = std::max(0.0, b);
  const double sgn = (b >= 0.0) ? 1.0 : -1.0;
  double s = lo, fs = flux.value(t, x, lo);
  for (double c : flux.criticalPoints()) {
    if (c <= s || c >= hi) continue;
    const double fc = flux.value(t, x, c);
    acc += sgn * std::min(fc - fs, 0.0);
    s = c;
    fs = fc;
  }
  acc += sgn * std::min(flux.value(t, x, hi) - fs, 0.0);
  return acc;
}

}  // namespace detail

/// Sampled bound on |∂u P| over the box [xLo,xHi] x [uLo,uHi] x [0,T].
template <class Flux>
double estimate_max_speed(const Flux& flux, double xLo, double xHi, double uLo, double uHi,
                          double T, int grid = 64) {
  double s = 0.0;
  for (int it = 0; it <= 4; ++it)
    for (int ix = 0; ix <= grid; ++ix)
      for (int iu = 0; iu <= grid; ++iu) {
        const double t = T * it / 4.0;
        const double x = xLo + (xHi - xLo) * ix / grid;
        const double u = uLo + (uHi - uLo) * iu / grid;
        s = std::max(s, std::abs(flux.du(t, x, u)));
      }
  return s;
}

/// Conservative explicit scheme: Engquist-Osher numerical flux at cell
/// interfaces plus centered second differences scaled by eps, forward Euler
/// under the combined CFL dt <= 0.4 min(h/maxSpeed, h^2/(2 eps)). The datum
/// is sampled by exact cell averages; the domain is padded by
/// maxSpeed*T + 6 sqrt(eps T) so the zero-flux boundary stays inert.
template <class Flux>
GridSolution viscous_solve(const Flux& flux, double eps, const PiecewiseConstantFn& u0,
                           double T, std::vector<double> outputTimes, double h,
                           double maxSpeed = 0.0) {
  if (!(eps > 0)) throw std::invalid_argument("viscous_solve: eps must be positive");
  if (!(h > 0)) throw std::invalid_argument("viscous_solve: h must be positive");
  if (!(T > 0)) throw std::invalid_argument("viscous_solve: T must be positive");
  if (u0.empty()) throw std::invalid_argument("viscous_solve: empty datum");
  std::sort(outputTimes.begin(), outputTimes.end());

  auto [lo, hi] = u0.hull();
  double uMin = 0.0, uMax = 0.0;
  for (double v : u0.values()) {
    uMin = std::min(uMin, v);
    uMax = std::max(uMax, v);
  }
  if (maxSpeed <= 0.0)
    maxSpeed = 1.1 * estimate_max_speed(flux, lo - 1.0, hi + 1.0, uMin, uMax, T);

  const double pad = maxSpeed * T + 6.0 * std::sqrt(eps * T) + 2.0 * h;
  GridSolution sol;
  sol.epsilon = eps;
  sol.h = h;
  sol.maxSpeed = maxSpeed;
  sol.xLo = lo - pad;
  const int M = static_cast<int>(std::ceil((hi + pad - sol.xLo) / h));
  sol.cflHyperbolic = maxSpeed > 0 ? 0.4 * h / maxSpeed
                                   : std::numeric_limits<double>::infinity();
  sol.cflParabolic = 0.4 * h * h / (2.0 * eps);
  sol.dtBase = std::min(sol.cflHyperbolic, sol.cflParabolic);
  if (sol.dtBase < 1e-14 * T)
    throw std::runtime_error("viscous_solve: CFL forced the time step to underflow");

  std::vector<double> u(M), unew(M), F(M + 1, 0.0);
  for (int j = 0; j < M; ++j) {
    const double a = sol.xLo + h * j;
    u[j] = u0.integrate(a, a + h) / h;
  }
  sol.initialMass = 0.0;
  for (double v : u) sol.initialMass += v * h;

  auto store = [&](double t) {
    for (int j = 0; j < M; ++j)
      if (!std::isfinite(u[j]))
        throw std::runtime_error("viscous_solve: NaN detected at t=" + std::to_string(t) +
                                 ", cell " + std::to_string(j));
    sol.times.push_back(t);
    sol.values.push_back(u);
    double mass = 0.0;
    for (double v : u) mass += v * h;
    sol.massDrift = std::max(sol.massDrift, std::abs(mass - sol.initialMass));
  };

  std::size_t nextOut = 0;
  while (nextOut < outputTimes.size() && outputTimes[nextOut] <= 0.0) {
    store(0.0);
    ++nextOut;
  }

  double t = 0.0;
  const double teps = 1e-14 * std::max(1.0, T);
  while (t < T - teps) {
    double dt = std::min(sol.dtBase, T - t);
    if (nextOut < outputTimes.size())
      dt = std::min(dt, std::max(outputTimes[nextOut] - t, sol.dtBase * 1e-6));
    // interfaces 1..M-1; F[0] = F[M] = 0 (zero flux at the padded boundary)
    for (int j = 1; j < M; ++j) {
      const double xf = sol.xLo + h * j;
      F[j] = detail::eoPlus(flux, t, xf, u[j - 1]) + detail::eoMinus(flux, t, xf, u[j]) -
             eps * (u[j] - u[j - 1]) / h;
    }
    const double lam = dt / h;
    for (int j = 0; j < M; ++j) unew[j] = u[j] - lam * (F[j + 1] - F[j]);
    u.swap(unew);
    t += dt;
    while (nextOut < outputTimes.size() && outputTimes[nextOut] <= t + teps) {
      store(t);
      ++nextOut;
    }
  }
  return sol;
}

}  // namespace clawlab
