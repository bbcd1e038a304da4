#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "clawlab/fields.hpp"
#include "clawlab/piecewise_constant.hpp"

namespace clawlab {

/// Tabulation of a flux f on the dyadic grid 2^{-nu} Z over [-R0, R0].
/// The induced piecewise linear interpolant f_nu satisfies
/// Lip(f_nu - f) <= ||f||_{C^2} 2^{-nu-1} on the range.
struct FluxTable {
  int nu = 0;
  std::int64_t kLo = 0;  // grid index of the first tabulated value
  std::vector<double> f;

  double spacing() const { return std::ldexp(1.0, -nu); }
  std::int64_t kHi() const { return kLo + static_cast<std::int64_t>(f.size()) - 1; }
  double uOf(std::int64_t k) const { return static_cast<double>(k) * spacing(); }
  double at(std::int64_t k) const {
    if (k < kLo || k > kHi()) throw std::out_of_range("FluxTable: state off the table");
    return f[static_cast<std::size_t>(k - kLo)];
  }
  /// chord speed of f_nu between grid states a < b or a > b
  double chord(std::int64_t a, std::int64_t b) const {
    return (at(b) - at(a)) / (uOf(b) - uOf(a));
  }
  /// piecewise linear evaluation
  double eval(double u) const {
    const double g = u / spacing();
    std::int64_t k = static_cast<std::int64_t>(std::floor(g));
    k = std::clamp(k, kLo, kHi() - 1);
    const double w = g - static_cast<double>(k);
    return at(k) * (1.0 - w) + at(k + 1) * w;
  }
};

/// Tabulate f on 2^{-nu} Z over [uLo, uHi] (grid rounded inward).
inline FluxTable pwl_interpolant_range(const LocalFlux& flux, int nu, double uLo, double uHi) {
  if (nu < 0 || nu > 40) throw std::invalid_argument("pwl_interpolant: nu out of range");
  if (!(uHi > uLo)) throw std::invalid_argument("pwl_interpolant: empty range");
  if (uLo < flux.box.uLo - 1e-12 || uHi > flux.box.uHi + 1e-12)
    throw std::invalid_argument("pwl_interpolant: range exceeds validity box of '" +
                                flux.name + "'");
  FluxTable tab;
  tab.nu = nu;
  const double h = tab.spacing();
  tab.kLo = static_cast<std::int64_t>(std::ceil(uLo / h - 1e-9));
  const std::int64_t kHi = static_cast<std::int64_t>(std::floor(uHi / h + 1e-9));
  if (kHi <= tab.kLo) throw std::invalid_argument("pwl_interpolant: range below grid spacing");
  tab.f.resize(static_cast<std::size_t>(kHi - tab.kLo) + 1);
  for (std::int64_t k = tab.kLo; k <= kHi; ++k)
    tab.f[static_cast<std::size_t>(k - tab.kLo)] = flux.f(static_cast<double>(k) * h);
  return tab;
}

/// Symmetric-range tabulation over [-R0, R0].
inline FluxTable pwl_interpolant(const LocalFlux& flux, int nu, double R0) {
  return pwl_interpolant_range(flux, nu, -R0, R0);
}

/// One outgoing wave of a Riemann fan: jump from grid state kl to kr
/// travelling at the chord speed.
struct FanWave {
  std::int64_t kl, kr;
  double speed;
};

/// Entropy-admissible fan for the piecewise linear flux: lower convex
/// envelope of the table on [uL,uR] when uL < uR, upper concave envelope
/// when uL > uR. Speeds come out strictly increasing; collinear table points
/// merge into a single front.
inline std::vector<FanWave> riemann_fan(const FluxTable& tab, std::int64_t kL,
                                        std::int64_t kR) {
  if (kL < tab.kLo || kL > tab.kHi() || kR < tab.kLo || kR > tab.kHi())
    throw std::out_of_range("riemann_fan: state off the table");
  std::vector<FanWave> out;
  if (kL == kR) return out;

  const bool up = kL < kR;  // lower convex envelope on [kL,kR]
  const std::int64_t a = std::min(kL, kR), b = std::max(kL, kR);
  // monotone stack over grid points a..b; cross() > 0 keeps strict hull
  // vertices for the lower envelope (reverse sign for the upper one).
  std::vector<std::int64_t> hull;
  for (std::int64_t k = a; k <= b; ++k) {
    const double xk = tab.uOf(k), yk = tab.at(k);
    while (hull.size() >= 2) {
      const std::int64_t p = hull[hull.size() - 2], q = hull[hull.size() - 1];
      const double cross = (tab.uOf(q) - tab.uOf(p)) * (yk - tab.at(p)) -
                           (xk - tab.uOf(p)) * (tab.at(q) - tab.at(p));
      const bool pop = up ? (cross <= 0.0) : (cross >= 0.0);
      if (!pop) break;
      hull.pop_back();
    }
    hull.push_back(k);
  }
  // hull runs a..b with increasing u; waves go from kL to kR
  if (up) {
    for (std::size_t i = 0; i + 1 < hull.size(); ++i)
      out.push_back({hull[i], hull[i + 1], tab.chord(hull[i], hull[i + 1])});
  } else {
    for (std::size_t i = hull.size(); i-- > 1;)
      out.push_back({hull[i], hull[i - 1], tab.chord(hull[i], hull[i - 1])});
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (!(out[i].speed < out[i + 1].speed))
      throw std::logic_error("riemann_fan: non-sorted fan speeds");
  return out;
}

/// Round the cell values of a step function to the nearest 2^{-nu} grid
/// value. Rounding is monotone, so the sup norm and the total variation of
/// monotone pieces stay within one grid quantum of the original.
inline PiecewiseConstantFn discretize_to_grid(const PiecewiseConstantFn& u, int nu) {
  if (u.empty()) return u;
  const double h = std::ldexp(1.0, -nu);
  std::vector<double> vals(u.values().size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = h * std::llround(u.values()[i] / h);
  return PiecewiseConstantFn(u.breakpoints(), vals);
}

struct FrontEvent {
  double t;
  double x;
  int nIncoming;
  int nOutgoing;
};

/// A front over its lifetime: born at (tBirth, xBirth), travels at constant
/// speed, dies at tDeath (infinity for survivors).
struct Front {
  double tBirth, xBirth, speed;
  std::int64_t kl, kr;
  double tDeath = std::numeric_limits<double>::infinity();

  double positionAt(double t) const { return xBirth + speed * (t - tBirth); }
};

struct EventBudgetExhausted : std::runtime_error {
  explicit EventBudgetExhausted(std::size_t budget)
      : std::runtime_error("front tracking: event budget " + std::to_string(budget) +
                           " exhausted") {}
};

/// Exact event-driven wavefront solution of du/dt + d/dx f_nu(u) = 0 for a
/// datum with values on the 2^{-nu} grid. States stay on the grid for all
/// time; the total variation is non-increasing across events.
class FrontTrajectory {
 public:
  FluxTable table;
  std::vector<Front> fronts;       // every front ever alive, birth-ordered
  std::vector<FrontEvent> events;  // time-sorted collision records
  double horizon = 0.0;
  double initialTV = 0.0;

  /// Exact step function at time t in [0, horizon]; at an event time the
  /// post-event configuration is used (right-continuity in time).
  PiecewiseConstantFn sample(double t) const {
    const double tol = 1e-12 * std::max(1.0, horizon);
    if (t < -tol || t > horizon + tol)
      throw std::invalid_argument("FrontTrajectory::sample: time beyond horizon");
    t = std::clamp(t, 0.0, horizon);
    struct Live {
      double x;
      std::int64_t kl, kr;
    };
    std::vector<Live> live;
    for (const auto& fr : fronts)
      if (fr.tBirth <= t && t < fr.tDeath) live.push_back({fr.positionAt(t), fr.kl, fr.kr});
    if (live.empty()) return {};
    std::stable_sort(live.begin(), live.end(),
                     [](const Live& a, const Live& b) { return a.x < b.x; });
    const double h = table.spacing();
    // walk left to right; zero-width cells (coincident fronts, e.g. a fan at
    // its birth instant) are skipped
    std::vector<double> breaks{live.front().x}, vals;
    for (std::size_t i = 0; i + 1 < live.size(); ++i) {
      const double nxt = live[i + 1].x;
      if (nxt > breaks.back()) {
        vals.push_back(static_cast<double>(live[i].kr) * h);
        breaks.push_back(nxt);
      }
    }
    if (vals.empty()) return {};
    return PiecewiseConstantFn(breaks, vals);
  }

  double tvAt(double t) const {
    double tv = 0.0;
    for (const auto& fr : fronts)
      if (fr.tBirth <= t && t < fr.tDeath)
        tv += std::abs(static_cast<double>(fr.kr - fr.kl)) * table.spacing();
    return tv;
  }
};

/// Event-queue front tracking over [0, T].
///
/// The datum must take values on the 2^{-nu} grid (see discretize_to_grid).
/// Simultaneous collisions within time tolerance 1e-12*T collapse into a
/// single multi-front event solved on the outermost states.
inline FrontTrajectory front_track(const LocalFlux& flux, int nu,
                                   const PiecewiseConstantFn& u0, double T,
                                   std::size_t eventBudget = 1000000) {
  if (!(T > 0)) throw std::invalid_argument("front_track: horizon must be positive");
  FrontTrajectory traj;
  // table range: the datum range (with the exterior 0) plus padding, clamped
  // to the flux validity box; states never leave the datum range
  double dataLo = 0.0, dataHi = 0.0;
  for (double v : u0.values()) {
    dataLo = std::min(dataLo, v);
    dataHi = std::max(dataHi, v);
  }
  const double lo = std::max(flux.box.uLo, dataLo - 0.5);
  const double hi = std::min(flux.box.uHi, dataHi + 0.5);
  if (lo > dataLo + 1e-12 || hi < dataHi - 1e-12)
    throw std::invalid_argument("front_track: flux validity box does not contain data range");
  traj.table = pwl_interpolant_range(flux, nu, lo, hi);
  traj.horizon = T;
  const FluxTable& tab = traj.table;
  const double h = tab.spacing();

  // datum values as grid indices; reject off-grid data
  std::vector<std::int64_t> k(u0.values().size() + 2, 0);
  for (std::size_t i = 0; i < u0.values().size(); ++i) {
    const double g = u0.values()[i] / h;
    const std::int64_t ki = std::llround(g);
    if (std::abs(g - static_cast<double>(ki)) > 1e-9)
      throw std::invalid_argument("front_track: datum value off the 2^-nu grid");
    k[i + 1] = ki;
  }
  traj.initialTV = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    traj.initialTV += std::abs(static_cast<double>(k[i + 1] - k[i])) * h;

  // active fronts as indices into the pool, sorted by position
  std::vector<std::size_t> active;
  auto spawn = [&](double tB, double xB, const FanWave& w) {
    traj.fronts.push_back({tB, xB, w.speed, w.kl, w.kr});
    return traj.fronts.size() - 1;
  };
  {
    std::vector<double> jumpAt(u0.breakpoints());
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      if (k[i] == k[i + 1]) continue;
      const double x = (i < jumpAt.size()) ? jumpAt[i] : jumpAt.back();
      for (const auto& w : riemann_fan(tab, k[i], k[i + 1])) active.push_back(spawn(0.0, x, w));
    }
  }
  std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
    return traj.fronts[a].xBirth < traj.fronts[b].xBirth;
  });

  const double ttol = 1e-12 * std::max(1.0, T);
  double tNow = 0.0;
  while (true) {
    if (traj.events.size() >= eventBudget) throw EventBudgetExhausted(eventBudget);
    // earliest adjacent crossing after tNow
    double tStar = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      const Front& L = traj.fronts[active[i]];
      const Front& R = traj.fronts[active[i + 1]];
      if (L.speed <= R.speed) continue;
      const double gap = R.positionAt(tNow) - L.positionAt(tNow);
      const double tc = tNow + gap / (L.speed - R.speed);
      tStar = std::min(tStar, tc);
    }
    if (!(tStar <= T)) break;
    tStar = std::max(tStar, tNow);

    // collect contiguous colliding runs at tStar (within tolerance)
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last] active indices
    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      const Front& L = traj.fronts[active[i]];
      const Front& R = traj.fronts[active[i + 1]];
      if (L.speed <= R.speed) continue;
      const double gap = R.positionAt(tNow) - L.positionAt(tNow);
      const double tc = tNow + gap / (L.speed - R.speed);
      if (tc <= tStar + ttol) {
        if (!runs.empty() && runs.back().second == i)
          runs.back().second = i + 1;
        else
          runs.push_back({i, i + 1});
      }
    }

    std::vector<std::size_t> rebuilt;
    rebuilt.reserve(active.size());
    std::size_t cursor = 0;
    for (const auto& [first, last] : runs) {
      for (std::size_t i = cursor; i < first; ++i) rebuilt.push_back(active[i]);
      Front& L = traj.fronts[active[first]];
      Front& R = traj.fronts[active[last]];
      for (std::size_t i = first; i < last; ++i)
        if (traj.fronts[active[i]].kr != traj.fronts[active[i + 1]].kl)
          throw std::logic_error("front_track: non-adjacent crossing detected");
      const double xStar = 0.5 * (L.positionAt(tStar) + R.positionAt(tStar));
      const std::int64_t kl = L.kl, kr = R.kr;
      int nIn = 0;
      for (std::size_t i = first; i <= last; ++i) {
        traj.fronts[active[i]].tDeath = tStar;
        ++nIn;
      }
      auto fan = riemann_fan(tab, kl, kr);
      for (const auto& w : fan) rebuilt.push_back(spawn(tStar, xStar, w));
      traj.events.push_back({tStar, xStar, nIn, static_cast<int>(fan.size())});
      cursor = last + 1;
    }
    for (std::size_t i = cursor; i < active.size(); ++i) rebuilt.push_back(active[i]);
    active.swap(rebuilt);
    tNow = tStar;
  }
  return traj;
}

}  // namespace clawlab
