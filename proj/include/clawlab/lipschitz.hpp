#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace clawlab {

enum class LipAxis { space, density };

/// Sampling box over (x,u) for localized Lipschitz estimation.
struct LipBox {
  double xLo = 0.0, xHi = 0.0;
  double uLo = 0.0, uHi = 0.0;
};

/// Sampled Lipschitz constant: the max absolute divided difference of a
/// field between adjacent grid nodes along one axis, the other coordinate
/// swept over the grid. A lower estimate of the true constant; monotone
/// non-decreasing under nested grid refinement.
struct LipschitzEstimate {
  double value = 0.0;
  LipAxis axis = LipAxis::space;
  LipBox domain;
  std::int64_t sampleCount = 0;
  bool degenerate = false;
};

/// gridSize counts intervals per axis (>= 2 required; doubling produces
/// nested grids, hence monotone estimates).
template <class F>
LipschitzEstimate estimate_lip(F&& f, LipAxis axis, const LipBox& box, int gridSize = 512) {
  if (gridSize < 2) throw std::invalid_argument("estimate_lip: gridSize must be >= 2");
  LipschitzEstimate est;
  est.axis = axis;
  est.domain = box;

  const double aLo = (axis == LipAxis::space) ? box.xLo : box.uLo;
  const double aHi = (axis == LipAxis::space) ? box.xHi : box.uHi;
  const double sLo = (axis == LipAxis::space) ? box.uLo : box.xLo;
  const double sHi = (axis == LipAxis::space) ? box.uHi : box.xHi;
  if (!(aHi > aLo)) {
    est.degenerate = true;
    return est;
  }
  const int sweepN = (sHi > sLo) ? gridSize : 0;
  const double da = (aHi - aLo) / gridSize;
  double best = 0.0;
  std::int64_t samples = 0;
  for (int j = 0; j <= sweepN; ++j) {
    const double s = sweepN ? sLo + (sHi - sLo) * j / sweepN : sLo;
    double prev = (axis == LipAxis::space) ? f(aLo, s) : f(s, aLo);
    for (int i = 1; i <= gridSize; ++i) {
      const double a = aLo + da * i;
      const double cur = (axis == LipAxis::space) ? f(a, s) : f(s, a);
      best = std::max(best, std::abs(cur - prev) / da);
      prev = cur;
      ++samples;
    }
  }
  est.value = best;
  est.sampleCount = samples;
  return est;
}

}  // namespace clawlab
