#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "clawlab/fields.hpp"
#include "clawlab/piecewise_constant.hpp"
#include "clawlab/quadrature.hpp"

namespace clawlab {

/// C^1 bump profile psi(s) = (1-s^2)^3 on |s|<=1, 0 outside.
inline double bumpPsi(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? q * q * q : 0.0;
}
inline double bumpPsiPrime(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? -6.0 * s * q * q : 0.0;
}

/// max |psi'| on [0,1], attained at s = 1/sqrt(5)
inline double bumpPsiPrimeMax() { return 96.0 / (25.0 * std::sqrt(5.0)); }
/// ∫_0^1 psi = 16/35
inline double bumpPsiHalfMass() { return 16.0 / 35.0; }

/// Weight function Θ(t,x) for localized L^1 quantities: a callable with
/// compact-support metadata and recorded norms. Operations reject weights
/// without finite support.
struct Weight {
  Fn2 value;
  Fn2 dx;
  Fn2 dt;  // null for time-independent weights
  double supportLo = std::numeric_limits<double>::quiet_NaN();
  double supportHi = std::numeric_limits<double>::quiet_NaN();
  /// x-locations where smoothness changes; integration panels split here.
  std::vector<double> breaks;
  /// plateau on which Θ ≡ 1 (NaN when there is none); used by the
  /// compact-support dispensation of the stability estimate.
  double plateauLo = std::numeric_limits<double>::quiet_NaN();
  double plateauHi = std::numeric_limits<double>::quiet_NaN();
  // recorded norms
  double supNorm = 1.0;      // ||Θ||_∞
  double dxSup = 0.0;        // ||∂xΘ||_∞
  double l1xNorm = 0.0;      // ||Θ||_{L∞_t L¹_x}
  double lipX = 0.0;         // ||Θ||_{L∞_t Lip_x}

  bool hasCompactSupport() const {
    return std::isfinite(supportLo) && std::isfinite(supportHi) && supportLo < supportHi;
  }
  bool hasPlateau() const { return std::isfinite(plateauLo) && std::isfinite(plateauHi); }
};

/// Θ ≡ 1 on [lo,hi] and falling to 0 over a collar of width `collar` with
/// the C^1 profile psi; time independent. Intended for compactly supported
/// solutions: put [lo,hi] ⊇ 1-enlarged hull of the supports.
inline Weight collar_weight(double lo, double hi, double collar = 1.0) {
  if (!(hi > lo) || !(collar > 0)) throw std::invalid_argument("collar_weight: bad geometry");
  Weight w;
  w.supportLo = lo - collar;
  w.supportHi = hi + collar;
  w.plateauLo = lo;
  w.plateauHi = hi;
  w.breaks = {lo - collar, lo, hi, hi + collar};
  w.value = [lo, hi, collar](double, double x) {
    if (x >= lo && x <= hi) return 1.0;
    if (x < lo) return bumpPsi((lo - x) / collar);
    return bumpPsi((x - hi) / collar);
  };
  w.dx = [lo, hi, collar](double, double x) {
    if (x >= lo && x <= hi) return 0.0;
    if (x < lo) return bumpPsiPrime((lo - x) / collar) * (-1.0 / collar);
    return bumpPsiPrime((x - hi) / collar) / collar;
  };
  w.dt = nullptr;
  w.supNorm = 1.0;
  w.dxSup = bumpPsiPrimeMax() / collar;
  w.l1xNorm = (hi - lo) + 2.0 * collar * bumpPsiHalfMass();
  w.lipX = w.dxSup;
  return w;
}

/// Θ(t,x) = θ(c(t2-t) - |x| + 1 + r) with the C^1 ramp θ (θ' <= 2,
/// here the cubic smoothstep); satisfies the slope condition
/// ∂tΘ <= -c |∂xΘ| up to t = t2.
inline Weight slope_weight(double c, double r, double t2) {
  if (!(c >= 0) || !(r > 0)) throw std::invalid_argument("slope_weight: bad parameters");
  auto theta = [](double s) {
    if (s <= 0) return 0.0;
    if (s >= 1) return 1.0;
    return s * s * (3.0 - 2.0 * s);
  };
  auto thetaPrime = [](double s) {
    if (s <= 0 || s >= 1) return 0.0;
    return 6.0 * s * (1.0 - s);
  };
  Weight w;
  const double reach = c * t2 + 1.0 + r;  // support radius at t = 0
  w.supportLo = -reach;
  w.supportHi = reach;
  w.plateauLo = std::numeric_limits<double>::quiet_NaN();  // plateau shrinks with t
  w.plateauHi = w.plateauLo;
  w.breaks = {-reach, 0.0, reach};
  w.value = [=](double t, double x) { return theta(c * (t2 - t) - std::abs(x) + 1 + r); };
  w.dx = [=](double t, double x) {
    const double s = c * (t2 - t) - std::abs(x) + 1 + r;
    return -thetaPrime(s) * (x >= 0 ? 1.0 : -1.0);
  };
  w.dt = [=](double t, double x) {
    return -c * thetaPrime(c * (t2 - t) - std::abs(x) + 1 + r);
  };
  w.supNorm = 1.0;
  w.dxSup = 1.5;
  w.l1xNorm = 2.0 * reach;  // bound: |Θ| <= 1 on the support
  w.lipX = 1.5;
  return w;
}

/// Wrap a user-supplied profile; norms are sampled on `samples` nodes.
inline Weight make_weight(Fn2 value, Fn2 dx, Fn2 dt, double supportLo, double supportHi,
                          std::vector<double> breaks = {}, int samples = 4096) {
  if (!(std::isfinite(supportLo) && std::isfinite(supportHi) && supportLo < supportHi))
    throw std::invalid_argument("make_weight: weight lacks compact support metadata");
  Weight w;
  w.value = std::move(value);
  w.dx = std::move(dx);
  w.dt = std::move(dt);
  w.supportLo = supportLo;
  w.supportHi = supportHi;
  w.breaks = std::move(breaks);
  double sup = 0.0, dsup = 0.0, l1 = 0.0;
  const double h = (supportHi - supportLo) / samples;
  for (int i = 0; i <= samples; ++i) {
    const double x = supportLo + h * i;
    const double v = w.value(0.0, x);
    sup = std::max(sup, std::abs(v));
    if (w.dx) dsup = std::max(dsup, std::abs(w.dx(0.0, x)));
    l1 += std::abs(v) * (i == 0 || i == samples ? 0.5 : 1.0) * h;
  }
  w.supNorm = sup;
  w.dxSup = dsup;
  w.l1xNorm = l1;
  w.lipX = dsup;
  return w;
}

/// ∫ |u-w| Θ(t,·) dx on the merged partition, per-cell Gauss-Legendre of
/// order 5 with panels split at the weight's own smoothness breaks.
inline double weighted_l1_distance(const PiecewiseConstantFn& u, const PiecewiseConstantFn& w,
                                   const Weight& theta, double t) {
  if (!theta.hasCompactSupport())
    throw std::invalid_argument("weighted_l1_distance: weight lacks compact support metadata");
  auto pts = detail::mergedPartition(u, w);
  for (double b : theta.breaks)
    if (!pts.empty() && b > pts.front() && b < pts.back()) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double lo = std::max(pts[k], theta.supportLo);
    const double hi = std::min(pts[k + 1], theta.supportHi);
    if (hi <= lo) continue;
    const double gap = std::abs(u(0.5 * (pts[k] + pts[k + 1])) - w(0.5 * (pts[k] + pts[k + 1])));
    if (gap == 0.0) continue;
    acc += gap * gl5([&](double x) { return theta.value(t, x); }, lo, hi);
  }
  return acc;
}

}  // namespace clawlab
