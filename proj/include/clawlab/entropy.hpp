#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clawlab/flux.hpp"
#include "clawlab/front_tracking.hpp"
#include "clawlab/particles.hpp"
#include "clawlab/piecewise_constant.hpp"
#include "clawlab/quadrature.hpp"
#include "clawlab/viscous.hpp"
#include "clawlab/weights.hpp"

namespace clawlab {

/// Tensor C^2 bump test function
///   phi(t,x) = psi((t-t0)/tau) psi((x-x0)/hx),  psi(s) = (1-s^2)^3 on |s|<=1.
/// Non-negative and compactly supported in (t0-tau, t0+tau) x (x0-hx, x0+hx).
struct TestFunction {
  double t0, x0, tau, hx;

  double value(double t, double x) const {
    return bumpPsi((t - t0) / tau) * bumpPsi((x - x0) / hx);
  }
  double dt(double t, double x) const {
    return bumpPsiPrime((t - t0) / tau) / tau * bumpPsi((x - x0) / hx);
  }
  double dx(double t, double x) const {
    return bumpPsi((t - t0) / tau) * bumpPsiPrime((x - x0) / hx) / hx;
  }
  double tLo() const { return t0 - tau; }
  double tHi() const { return t0 + tau; }
  double xLo() const { return x0 - hx; }
  double xHi() const { return x0 + hx; }
};

/// Time-indexed step-function sampler covering [tLo, tHi].
struct SolutionSampler {
  std::function<PiecewiseConstantFn(double)> at;
  double tLo = 0.0, tHi = 0.0;
};

inline SolutionSampler make_sampler(std::shared_ptr<const ParticleTrajectory> traj) {
  SolutionSampler s;
  s.tLo = 0.0;
  s.tHi = traj->horizon();
  s.at = [traj](double t) { return traj->densityAt(t); };
  return s;
}

inline SolutionSampler make_sampler(std::shared_ptr<const FrontTrajectory> traj) {
  SolutionSampler s;
  s.tLo = 0.0;
  s.tHi = traj->horizon;
  s.at = [traj](double t) { return traj->sample(t); };
  return s;
}

/// Grid-solution sampler; interpolates linearly in time between stored
/// snapshots (second order for smooth viscous profiles).
inline SolutionSampler make_sampler(std::shared_ptr<const GridSolution> sol) {
  if (sol->times.empty()) throw std::invalid_argument("make_sampler: no stored snapshots");
  SolutionSampler s;
  s.tLo = sol->times.front();
  s.tHi = sol->times.back();
  s.at = [sol](double t) {
    const auto& ts = sol->times;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return sol->sample(ts.front());
    if (it == ts.end()) return sol->sample(ts.back());
    const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    const auto& a = sol->values[lo];
    const auto& b = sol->values[hi];
    std::vector<double> mix(a.size()), breaks(a.size() + 1);
    for (std::size_t j = 0; j < a.size(); ++j) mix[j] = (1.0 - w) * a[j] + w * b[j];
    for (std::size_t j = 0; j < breaks.size(); ++j) breaks[j] = sol->xLo + sol->h * j;
    return PiecewiseConstantFn(breaks, mix);
  };
  return s;
}

/// Refinement control for the space-time quadrature of entropy residuals.
struct QuadratureControl {
  int initialTimeTiles = 8;
  int maxTimeTiles = 512;
  double relTol = 1e-6;   // convergence: |R_2K - R_K| <= relTol * (1 + |R|)
  int maxPanelPerHx = 8;  // x panels are at most hx / this wide
};

namespace detail {

inline double signum(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

/// x-partition of [lo,hi] split at the sampler's breakpoints and capped at
/// maxWidth per panel.
inline std::vector<double> xPartition(const PiecewiseConstantFn& u, double lo, double hi,
                                      double maxWidth,
                                      const std::vector<double>& extraBreaks = {}) {
  std::vector<double> pts{lo, hi};
  for (double b : u.breakpoints())
    if (b > lo && b < hi) pts.push_back(b);
  for (double b : extraBreaks)
    if (b > lo && b < hi) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> out;
  out.push_back(pts.front());
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double w = pts[k + 1] - pts[k];
    const int sub = std::max(1, static_cast<int>(std::ceil(w / maxWidth)));
    for (int j = 1; j <= sub; ++j) out.push_back(pts[k] + w * j / sub);
  }
  return out;
}

}  // namespace detail

/// Kruzkov entropy residual
///   ∬ |u-c| ∂tφ + sign(u-c)[(P(t,x,u)-P(t,x,c)) ∂xφ - ∂xP(t,x,c) φ] dx dt
/// for all constants in `cs` simultaneously (the space-time samples are
/// shared). sign(0) = 0. Entropy solutions make this non-negative for every
/// c >= 0 and non-negative φ.
inline std::vector<double> entropy_residual_multi(const SolutionSampler& sol,
                                                  const SeparableFlux& P,
                                                  const std::vector<double>& cs,
                                                  const TestFunction& phi,
                                                  QuadratureControl ctl = {}) {
  if (phi.tLo() < sol.tLo - 1e-12 || phi.tHi() > sol.tHi + 1e-12)
    throw std::invalid_argument("entropy_residual: sampler does not cover supp(phi)");
  std::vector<double> gc(cs.size()), gdc;
  for (std::size_t i = 0; i < cs.size(); ++i) gc[i] = P.g(cs[i]);

  const double maxW = 2.0 * phi.hx / ctl.maxPanelPerHx;
  auto timeSlice = [&](double t, std::vector<double>& acc) {
    const PiecewiseConstantFn u = sol.at(t);
    const auto part = detail::xPartition(u, phi.xLo(), phi.xHi(), maxW);
    for (std::size_t p = 0; p + 1 < part.size(); ++p) {
      const double mid = 0.5 * (part[p] + part[p + 1]);
      const double half = 0.5 * (part[p + 1] - part[p]);
      const double uval = u(mid);  // constant on the panel
      for (std::size_t q = 0; q < 5; ++q) {
        const double x = mid + half * GaussLegendre5::nodes[q];
        const double w = half * GaussLegendre5::weights[q];
        const double pv = phi.value(t, x);
        const double pt = phi.dt(t, x);
        const double px = phi.dx(t, x);
        if (pv == 0.0 && pt == 0.0 && px == 0.0) continue;
        const double Ax = P.constA ? 1.0 : P.A(t, x);
        const double dAx = P.constA ? 0.0 : P.dxA(t, x);
        const double gu = P.g(uval);
        for (std::size_t i = 0; i < cs.size(); ++i) {
          const double sgn = detail::signum(uval - cs[i]);
          acc[i] += w * (std::abs(uval - cs[i]) * pt +
                         sgn * ((gu - gc[i]) * Ax * px - gc[i] * dAx * pv));
        }
      }
    }
  };

  std::vector<double> prev(cs.size(), 0.0), cur(cs.size(), 0.0);
  int K = ctl.initialTimeTiles;
  bool first = true;
  while (true) {
    std::fill(cur.begin(), cur.end(), 0.0);
    const double w = (phi.tHi() - phi.tLo()) / K;
    std::vector<double> slice(cs.size());
    for (int k = 0; k < K; ++k) {
      const double mid = phi.tLo() + (k + 0.5) * w;
      const double half = 0.5 * w;
      for (std::size_t q = 0; q < 5; ++q) {
        std::fill(slice.begin(), slice.end(), 0.0);
        timeSlice(mid + half * GaussLegendre5::nodes[q], slice);
        for (std::size_t i = 0; i < cs.size(); ++i)
          cur[i] += half * GaussLegendre5::weights[q] * slice[i];
      }
    }
    if (!first) {
      double worst = 0.0;
      for (std::size_t i = 0; i < cs.size(); ++i)
        worst = std::max(worst, std::abs(cur[i] - prev[i]) / (1.0 + std::abs(cur[i])));
      if (worst <= ctl.relTol || K >= ctl.maxTimeTiles) break;
    }
    first = false;
    prev = cur;
    K *= 2;
  }
  return cur;
}

inline double entropy_residual(const SolutionSampler& sol, const SeparableFlux& P, double c,
                               const TestFunction& phi, QuadratureControl ctl = {}) {
  return entropy_residual_multi(sol, P, {c}, phi, ctl).front();
}

/// Weak-form pairing ∬ u ∂tφ + P(t,x,u) ∂xφ dx dt; for non-negative u with
/// P(t,x,0) = 0 this coincides with the c = 0 entropy residual (independent
/// code path, used as a consistency oracle).
inline double weak_form_residual(const SolutionSampler& sol, const SeparableFlux& P,
                                 const TestFunction& phi, QuadratureControl ctl = {}) {
  const double maxW = 2.0 * phi.hx / ctl.maxPanelPerHx;
  auto timeSlice = [&](double t) {
    const PiecewiseConstantFn u = sol.at(t);
    const auto part = detail::xPartition(u, phi.xLo(), phi.xHi(), maxW);
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < part.size(); ++p) {
      const double mid = 0.5 * (part[p] + part[p + 1]);
      const double half = 0.5 * (part[p + 1] - part[p]);
      const double uval = u(mid);
      if (uval == 0.0) continue;
      for (std::size_t q = 0; q < 5; ++q) {
        const double x = mid + half * GaussLegendre5::nodes[q];
        const double w = half * GaussLegendre5::weights[q];
        acc += w * (uval * phi.dt(t, x) + P.value(t, x, uval) * phi.dx(t, x));
      }
    }
    return acc;
  };
  double prev = 0.0, cur = 0.0;
  int K = ctl.initialTimeTiles;
  bool first = true;
  while (true) {
    cur = 0.0;
    const double w = (phi.tHi() - phi.tLo()) / K;
    for (int k = 0; k < K; ++k)
      cur += gl5(timeSlice, phi.tLo() + k * w, phi.tLo() + (k + 1) * w);
    if (!first && (std::abs(cur - prev) <= ctl.relTol * (1.0 + std::abs(cur)) ||
                   K >= ctl.maxTimeTiles))
      break;
    first = false;
    prev = cur;
    K *= 2;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Quasi-entropy budgets.
// ---------------------------------------------------------------------------

/// Spatial density of an error measure at a fixed time, evaluable pointwise
/// with known smoothness breaks.
struct BudgetDensity {
  std::vector<double> breaks;
  std::function<double(double)> density;  // 0 when null
};

/// Per-solution budget: t -> densities of mu_0 and mu_1. Null = zero measure.
struct SolutionBudget {
  std::function<BudgetDensity(double)> mu0;
  std::function<BudgetDensity(double)> mu1;
};

inline SolutionBudget particle_budget(std::shared_ptr<const ParticleTrajectory> traj) {
  SolutionBudget b;
  b.mu1 = [traj](double t) {
    const auto mu = mu1_measure(traj->sampleWithDerivatives(t), traj->model());
    BudgetDensity d;
    d.breaks = mu.breaks;
    d.density = [mu](double x) { return mu.density(x); };
    return d;
  };
  return b;
}

/// eps |∂x u_eps| as a staircase over interface-centered intervals.
inline SolutionBudget viscous_budget(std::shared_ptr<const GridSolution> sol) {
  SolutionBudget b;
  b.mu1 = [sol](double t) {
    const PiecewiseConstantFn u = make_sampler(sol).at(t);
    const auto& bp = u.breakpoints();
    const auto& v = u.values();
    BudgetDensity d;
    if (v.size() < 2) return d;
    std::vector<double> centers(v.size()), grad(v.size() - 1);
    for (std::size_t j = 0; j < v.size(); ++j) centers[j] = 0.5 * (bp[j] + bp[j + 1]);
    for (std::size_t j = 0; j + 1 < v.size(); ++j)
      grad[j] = sol->epsilon * std::abs(v[j + 1] - v[j]) / sol->h;
    auto fn = std::make_shared<PiecewiseConstantFn>(std::move(centers), std::move(grad));
    d.breaks = fn->breakpoints();
    d.density = [fn](double x) { return (*fn)(x); };
    return d;
  };
  return b;
}

/// ∬ |φ| dmu0 dt + ∬ |∂xφ| dmu1 dt with the same panelled quadrature as the
/// residual.
inline double budget_allowance(const SolutionBudget& budget, const TestFunction& phi,
                               QuadratureControl ctl = {}) {
  if (!budget.mu0 && !budget.mu1) return 0.0;
  const double maxW = 2.0 * phi.hx / ctl.maxPanelPerHx;
  auto timeSlice = [&](double t) {
    double acc = 0.0;
    for (int which = 0; which < 2; ++which) {
      const auto& provider = which == 0 ? budget.mu0 : budget.mu1;
      if (!provider) continue;
      const BudgetDensity d = provider(t);
      if (!d.density) continue;
      std::vector<double> pts{phi.xLo(), phi.xHi()};
      for (double bb : d.breaks)
        if (bb > pts.front() && bb < pts.back()) pts.push_back(bb);
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        const double w = pts[p + 1] - pts[p];
        const int sub = std::max(1, static_cast<int>(std::ceil(w / maxW)));
        for (int j = 0; j < sub; ++j) {
          const double a = pts[p] + w * j / sub, bnd = pts[p] + w * (j + 1) / sub;
          acc += gl5(
              [&](double x) {
                const double rho = d.density(x);
                if (rho == 0.0) return 0.0;
                return rho * (which == 0 ? std::abs(phi.value(t, x)) : std::abs(phi.dx(t, x)));
              },
              a, bnd);
        }
      }
    }
    return acc;
  };
  double prev = 0.0, cur = 0.0;
  int K = ctl.initialTimeTiles;
  bool first = true;
  while (true) {
    cur = 0.0;
    const double w = (phi.tHi() - phi.tLo()) / K;
    for (int k = 0; k < K; ++k)
      cur += gl5(timeSlice, phi.tLo() + k * w, phi.tLo() + (k + 1) * w);
    if (!first && (std::abs(cur - prev) <= ctl.relTol * (1.0 + std::abs(cur)) ||
                   K >= ctl.maxTimeTiles))
      break;
    first = false;
    prev = cur;
    K *= 2;
  }
  return cur;
}

struct VerifyEntry {
  TestFunction phi;
  double c;
  double residual;
  double allowance;
  double margin;  // residual + allowance; quasi-entropy demands margin >= -tol
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  double worstMargin = std::numeric_limits<double>::infinity();
  std::size_t worstIndex = 0;
  int failures = 0;
  double numericalTolerance = 1e-6;
};

/// Executable form of the quasi-entropy inequality: for every (φ, c) on the
/// grids, residual >= -(∬|φ|dμ0 + ∬|∇φ|dμ1) - tolerance.
inline VerifyReport quasi_entropy_verify(const SolutionSampler& sol, const SeparableFlux& P,
                                         const SolutionBudget& budget,
                                         const std::vector<TestFunction>& phis,
                                         const std::vector<double>& cs,
                                         double numericalTolerance = 1e-6,
                                         QuadratureControl ctl = {}) {
  if (phis.empty() || cs.empty())
    throw std::invalid_argument("quasi_entropy_verify: empty verification grid");
  VerifyReport rep;
  rep.numericalTolerance = numericalTolerance;
  for (const auto& phi : phis) {
    const auto residuals = entropy_residual_multi(sol, P, cs, phi, ctl);
    const double allowance = budget_allowance(budget, phi, ctl);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      VerifyEntry e{phi, cs[i], residuals[i], allowance, residuals[i] + allowance};
      if (e.margin < rep.worstMargin) {
        rep.worstMargin = e.margin;
        rep.worstIndex = rep.entries.size();
      }
      if (e.margin < -numericalTolerance) ++rep.failures;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace clawlab
