#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clawlab/quadrature.hpp"

namespace clawlab {

/// Compactly supported BV step function: strictly increasing breakpoints
/// b_0 < ... < b_K and cell values v_0..v_{K-1} on the open cells
/// (b_k, b_{k+1}). The function is exactly 0 outside [b_0, b_K].
///
/// All pairwise algebra (sums, L1 distances) is performed exactly on the
/// merged breakpoint partition; no quadrature enters unless a smooth weight
/// does. Values are immutable after construction.
class PiecewiseConstantFn {
 public:
  /// Relative width below which a cell is merged into its left neighbour at
  /// construction time (guards merged-partition algorithms against
  /// floating-point breakpoint collisions).
  static constexpr double kMergeRel = 1e-14;

  PiecewiseConstantFn() = default;  // identically zero, empty support

  PiecewiseConstantFn(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.empty() && values.empty()) return;
    if (breakpoints.size() != values.size() + 1)
      throw std::invalid_argument("PiecewiseConstantFn: need K+1 breakpoints for K values");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("PiecewiseConstantFn: non-finite value");
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
      if (!(breakpoints[k] < breakpoints[k + 1]))
        throw std::invalid_argument("PiecewiseConstantFn: breakpoints not strictly increasing");
    const double diam = breakpoints.back() - breakpoints.front();
    const double tol = kMergeRel * diam;
    breaks_.reserve(breakpoints.size());
    values_.reserve(values.size());
    breaks_.push_back(breakpoints.front());
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double right = breakpoints[k + 1];
      if (right - breaks_.back() < tol && k + 1 < values.size()) {
        continue;  // absorb sliver into the next cell
      }
      if (right - breaks_.back() < tol && !values_.empty()) {
        breaks_.back() = right;  // trailing sliver: extend the previous cell
        continue;
      }
      breaks_.push_back(right);
      values_.push_back(values[k]);
    }
  }

  static PiecewiseConstantFn zero() { return {}; }

  /// Indicator-type datum: value h on [a,b], 0 elsewhere.
  static PiecewiseConstantFn box(double a, double b, double h) {
    return PiecewiseConstantFn({a, b}, {h});
  }

  bool empty() const { return values_.empty(); }
  std::size_t cellCount() const { return values_.size(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  /// Hull of the representation, [b_0, b_K]. Zero for the empty function.
  std::pair<double, double> hull() const {
    if (empty()) return {0.0, 0.0};
    return {breaks_.front(), breaks_.back()};
  }

  /// Convex hull of the support: trims leading/trailing zero-valued cells.
  /// Returns {0,0} and sets ok=false when the function vanishes identically.
  std::pair<double, double> supportHull(bool* ok = nullptr) const {
    std::size_t lo = 0, hi = values_.size();
    while (lo < hi && values_[lo] == 0.0) ++lo;
    while (hi > lo && values_[hi - 1] == 0.0) --hi;
    if (lo == hi) {
      if (ok) *ok = false;
      return {0.0, 0.0};
    }
    if (ok) *ok = true;
    return {breaks_[lo], breaks_[hi]};
  }

  /// Pointwise evaluation; right-continuous at interior breakpoints, 0 outside.
  double operator()(double x) const {
    if (empty() || x < breaks_.front() || x >= breaks_.back()) return 0.0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - breaks_.begin());
    return values_[k - 1];
  }

  /// Exact mass, summed left-to-right.
  double mass() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k)
      m += values_[k] * (breaks_[k + 1] - breaks_[k]);
    return m;
  }

  /// Total variation including the jumps from/to the exterior zero state.
  double totalVariation() const {
    if (empty()) return 0.0;
    double tv = std::abs(values_.front());
    for (std::size_t k = 0; k + 1 < values_.size(); ++k)
      tv += std::abs(values_[k + 1] - values_[k]);
    tv += std::abs(values_.back());
    return tv;
  }

  double supNorm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }

  /// Exact integral of the function over [a,b].
  double integrate(double a, double b) const {
    if (empty() || b <= a) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double lo = std::max(a, breaks_[k]);
      const double hi = std::min(b, breaks_[k + 1]);
      if (hi > lo) acc += values_[k] * (hi - lo);
    }
    return acc;
  }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

namespace detail {

/// Merged breakpoint partition of two step functions.
inline std::vector<double> mergedPartition(const PiecewiseConstantFn& u,
                                           const PiecewiseConstantFn& w) {
  std::vector<double> pts;
  pts.reserve(u.breakpoints().size() + w.breakpoints().size());
  std::merge(u.breakpoints().begin(), u.breakpoints().end(), w.breakpoints().begin(),
             w.breakpoints().end(), std::back_inserter(pts));
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace detail

/// Exact ∫|u-w| dx on the merged partition. Disjoint supports are legal.
inline double l1_distance(const PiecewiseConstantFn& u, const PiecewiseConstantFn& w) {
  const auto pts = detail::mergedPartition(u, w);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    acc += std::abs(u(mid) - w(mid)) * (pts[k + 1] - pts[k]);
  }
  return acc;
}

/// a*u + b*w assembled exactly on the merged partition.
inline PiecewiseConstantFn combine(const PiecewiseConstantFn& u, const PiecewiseConstantFn& w,
                                   double a, double b) {
  const auto pts = detail::mergedPartition(u, w);
  if (pts.size() < 2) return {};
  std::vector<double> vals(pts.size() - 1);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    vals[k] = a * u(mid) + b * w(mid);
  }
  return PiecewiseConstantFn(pts, vals);
}

/// Copy of u with extra breakpoints inserted (values unchanged).
inline PiecewiseConstantFn refined(const PiecewiseConstantFn& u, std::vector<double> extra) {
  if (u.empty()) return u;
  auto [lo, hi] = u.hull();
  std::vector<double> pts = u.breakpoints();
  for (double x : extra)
    if (x > lo && x < hi) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> vals(pts.size() - 1);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) vals[k] = u(0.5 * (pts[k] + pts[k + 1]));
  return PiecewiseConstantFn(pts, vals);
}

namespace detail {

/// Shortest round-trip decimal representation, stable across runs.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

/// Serialization: two-column CSV (breakpoint, value of cell to the right);
/// the final row carries the last breakpoint and an empty value field.
inline void writeCsv(std::ostream& os, const PiecewiseConstantFn& u) {
  os << "breakpoint,value\n";
  const auto& b = u.breakpoints();
  const auto& v = u.values();
  for (std::size_t k = 0; k < v.size(); ++k)
    os << detail::fmt(b[k]) << ',' << detail::fmt(v[k]) << '\n';
  if (!b.empty()) os << detail::fmt(b.back()) << ",\n";
}

inline PiecewiseConstantFn readPiecewiseCsv(std::istream& is) {
  std::vector<double> breaks, vals;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("breakpoint", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("piecewise CSV: missing comma in '" + line + "'");
    breaks.push_back(std::stod(line.substr(0, comma)));
    const std::string rest = line.substr(comma + 1);
    if (!rest.empty() && rest != "\r") vals.push_back(std::stod(rest));
  }
  return PiecewiseConstantFn(std::move(breaks), std::move(vals));
}

}  // namespace clawlab
