#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clawlab/front_tracking.hpp"
#include "clawlab/parallel.hpp"
#include "clawlab/particles.hpp"
#include "clawlab/piecewise_constant.hpp"
#include "clawlab/viscous.hpp"

namespace clawlab {

// ---------------------------------------------------------------------------
// Log-log least squares.
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;  // (resolution, error)
};

/// Ordinary least squares on (log resolution, log error). Deterministic;
/// requires at least 3 points with positive coordinates.
inline RateFit rate_fit(std::vector<std::pair<double, double>> points) {
  if (points.size() < 3)
    throw std::invalid_argument("rate_fit: need at least 3 points, got " +
                                std::to_string(points.size()));
  for (const auto& [x, y] : points)
    if (!(x > 0) || !(y > 0))
      throw std::invalid_argument("rate_fit: coordinates must be positive");
  const std::size_t n = points.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  RateFit fit;
  const double den = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssRes = 0, ssTot = 0;
  const double my = sy / n;
  for (const auto& [x, y] : points) {
    const double ly = std::log(y);
    const double pred = fit.intercept + fit.slope * std::log(x);
    ssRes += (ly - pred) * (ly - pred);
    ssTot += (ly - my) * (ly - my);
  }
  fit.r2 = ssTot > 0 ? std::max(0.0, 1.0 - ssRes / ssTot) : 1.0;
  fit.points = std::move(points);
  return fit;
}

// ---------------------------------------------------------------------------
// The sharpness counterexample building blocks.
// ---------------------------------------------------------------------------

/// beta_N(x) = sum_{k=0}^{C_N} (1/sqrt N) 1_{[2k/sqrt N, (2k+1)/sqrt N]}(x - offset):
/// C_N + 1 teeth of height and width 1/sqrt N separated by equal gaps.
/// Mass (C_N+1)/N, TV 2(C_N+1)/sqrt N, support width (2 C_N + 1)/sqrt N.
inline PiecewiseConstantFn beta_block(std::int64_t N, std::int64_t CN, double offset = 0.0) {
  if (N < 1 || CN < 1) throw std::invalid_argument("beta_block: need N >= 1, C_N >= 1");
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  std::vector<double> breaks, vals;
  for (std::int64_t k = 0; k <= CN; ++k) {
    breaks.push_back(offset + 2.0 * k * s);
    vals.push_back(s);
    breaks.push_back(offset + (2.0 * k + 1.0) * s);
    if (k < CN) vals.push_back(0.0);
  }
  return PiecewiseConstantFn(std::move(breaks), std::move(vals));
}

/// C_N = ceil(sqrt(a_N) N^{3/4}) with the default a_N = 1/(sqrt N log N),
/// i.e. C_N = ceil(sqrt(N / log N)).
inline std::int64_t default_CN(std::int64_t N) {
  const double n = static_cast<double>(N);
  return static_cast<std::int64_t>(std::ceil(std::sqrt(n / std::log(n))));
}

/// Single beta block completed to a probability by a base cell on [-1, 0].
inline PiecewiseConstantFn beta_datum(std::int64_t N, std::int64_t CN) {
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  if ((2.0 * CN + 1.0) * s > 1.0 + 1e-12)
    throw std::invalid_argument("beta_datum: block does not fit in [0,1]");
  const double blockMass = static_cast<double>(CN + 1) / static_cast<double>(N);
  const PiecewiseConstantFn block = beta_block(N, CN);
  const PiecewiseConstantFn base = PiecewiseConstantFn::box(-1.0, 0.0, 1.0 - blockMass);
  return combine(base, block, 1.0, 1.0);
}

/// Multi-block counterexample datum: beta blocks at disjoint offsets
/// b_j = sum_{h<j} (2 C_h + 1)/sqrt(N_h) inside [0,1], mass-completed on
/// [-1,0]. Construction fails loudly if the Lemma's constraints
/// (sum of widths <= 1, sum of TVs <= 1, sum of masses <= 1) are violated.
struct CounterexampleDatum {
  struct Block {
    std::int64_t N, CN;
    double offset;
  };
  std::vector<Block> blocks;
  double baseValue = 0.0;
  PiecewiseConstantFn assembled;
};

inline CounterexampleDatum counterexample_datum(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& blocks) {
  CounterexampleDatum out;
  double widthSum = 0.0, tvSum = 0.0, massSum = 0.0;
  PiecewiseConstantFn acc;
  for (const auto& [N, CN] : blocks) {
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    out.blocks.push_back({N, CN, widthSum});
    acc = combine(acc, beta_block(N, CN, widthSum), 1.0, 1.0);
    widthSum += (2.0 * CN + 1.0) * s;
    tvSum += 2.0 * (CN + 1.0) * s;
    massSum += static_cast<double>(CN + 1) / static_cast<double>(N);
  }
  if (widthSum > 1.0 + 1e-12 || tvSum > 1.0 + 1e-12 || massSum > 1.0 + 1e-12)
    throw std::invalid_argument("counterexample_datum: blocks violate the constraints");
  out.baseValue = 1.0 - massSum;
  out.assembled = combine(PiecewiseConstantFn::box(-1.0, 0.0, out.baseValue), acc, 1.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence studies. All studies are deterministic given their
// configuration; ladder rungs are independent jobs.
// ---------------------------------------------------------------------------

struct StudyRow {
  double resolution;
  double t;
  double error;
  double bound;   // NaN when the study carries no termwise bound
  double margin;  // bound - error (NaN when no bound)
};

struct ParticleConvergenceStudy {
  std::vector<StudyRow> rows;
  RateFit fit;  // sup-over-time error vs N
  std::vector<int> Ns;
  std::vector<double> supErrors;  // per N (excluding the reference)
};

/// Self-convergence against the finest-N run: for each N < Nmax and output
/// time, the L1 distance of the reconstructed densities.
inline ParticleConvergenceStudy particle_convergence_study(
    const ParticleModel& model, const PiecewiseConstantFn& rho0, std::vector<int> Nlist,
    double T, std::vector<double> outputTimes, StepControl ctl = {}, int jobs = 1) {
  if (Nlist.size() < 2)
    throw std::invalid_argument("particle_convergence_study: need at least 2 resolutions");
  std::sort(Nlist.begin(), Nlist.end());
  std::sort(outputTimes.begin(), outputTimes.end());
  std::vector<std::vector<PiecewiseConstantFn>> densities(Nlist.size());
  parallel_for(Nlist.size(), jobs, [&](std::size_t i) {
    const auto traj = evolve(init_particles(rho0, Nlist[i]), model, T, outputTimes, ctl);
    auto& out = densities[i];
    for (double t : outputTimes) out.push_back(density_from_particles(traj.snapshotAt(t).state));
  });
  ParticleConvergenceStudy study;
  study.Ns = Nlist;
  const auto& ref = densities.back();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i + 1 < Nlist.size(); ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k < outputTimes.size(); ++k) {
      const double err = l1_distance(densities[i][k], ref[k]);
      sup = std::max(sup, err);
      study.rows.push_back({static_cast<double>(Nlist[i]), outputTimes[k], err,
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});
    }
    study.supErrors.push_back(sup);
    pts.push_back({static_cast<double>(Nlist[i]), sup});
  }
  study.fit = rate_fit(pts);
  return study;
}

struct CauchyStudy {
  struct PairRow {
    int M, N;
    double t;
    double gap;      // ||rho^N(t) - rho^M(t)||_1
    double initGap;  // ||rho0^N - rho0^M||_1
    double root;     // (1/M + 1/N)^{1/2}
    double envelope; // K(t) initGap + L(t) root
    double margin;   // envelope - gap (>= 0 by the envelope fit)
  };
  std::vector<PairRow> rows;
  std::vector<double> times;
  std::vector<double> K, L;  // fitted per time
  bool kMonotone = false, lMonotone = false;
};

namespace detail {

/// Minimal dominating envelope: minimize sum of slacks of K a_p + L b_p
/// over K, L >= 0 subject to K a_p + L b_p >= g_p for all p. Solved exactly
/// by vertex enumeration (2 unknowns).
inline std::pair<double, double> dominating_envelope(const std::vector<double>& a,
                                                     const std::vector<double>& b,
                                                     const std::vector<double>& g) {
  const std::size_t n = g.size();
  auto feasible = [&](double K, double L) {
    if (!(K >= -1e-12) || !(L >= -1e-12)) return false;
    for (std::size_t p = 0; p < n; ++p)
      if (K * a[p] + L * b[p] < g[p] - 1e-12 * std::max(1.0, g[p])) return false;
    return true;
  };
  auto objective = [&](double K, double L) {
    double s = 0;
    for (std::size_t p = 0; p < n; ++p) s += K * a[p] + L * b[p] - g[p];
    return s;
  };
  double bestK = 0, bestL = 0, bestObj = std::numeric_limits<double>::infinity();
  auto consider = [&](double K, double L) {
    K = std::max(K, 0.0);
    L = std::max(L, 0.0);
    if (feasible(K, L)) {
      const double o = objective(K, L);
      if (o < bestObj - 1e-15) {
        bestObj = o;
        bestK = K;
        bestL = L;
      }
    }
  };
  // axis-only candidates
  double kOnly = 0, lOnly = 0;
  bool kOk = true, lOk = true;
  for (std::size_t p = 0; p < n; ++p) {
    if (a[p] > 0)
      kOnly = std::max(kOnly, g[p] / a[p]);
    else if (g[p] > 0)
      kOk = false;
    if (b[p] > 0)
      lOnly = std::max(lOnly, g[p] / b[p]);
    else if (g[p] > 0)
      lOk = false;
  }
  if (kOk) consider(kOnly, 0.0);
  if (lOk) consider(0.0, lOnly);
  // pairwise active constraints
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const double det = a[p] * b[q] - a[q] * b[p];
      if (std::abs(det) < 1e-14) continue;
      consider((g[p] * b[q] - g[q] * b[p]) / det, (a[p] * g[q] - a[q] * g[p]) / det);
    }
  if (!std::isfinite(bestObj))
    throw std::runtime_error("dominating_envelope: no feasible fit");
  return {bestK, bestL};
}

}  // namespace detail

/// Pairwise Cauchy gaps with the envelope K ||Δrho_0||_1 + L (1/M + 1/N)^{1/2}
/// fitted per output time (least total slack subject to domination).
inline CauchyStudy cauchy_study(const ParticleModel& model, const PiecewiseConstantFn& rho0,
                                const std::vector<std::pair<int, int>>& pairs, double T,
                                std::vector<double> outputTimes, StepControl ctl = {},
                                int jobs = 1) {
  for (auto [M, N] : pairs)
    if (M == N) throw std::invalid_argument("cauchy_study: pairs must have M != N");
  std::sort(outputTimes.begin(), outputTimes.end());
  std::vector<int> Ns;
  for (auto [M, N] : pairs) {
    Ns.push_back(M);
    Ns.push_back(N);
  }
  std::sort(Ns.begin(), Ns.end());
  Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());

  std::vector<PiecewiseConstantFn> init(Ns.size());
  std::vector<std::vector<PiecewiseConstantFn>> dens(Ns.size());
  parallel_for(Ns.size(), jobs, [&](std::size_t i) {
    const auto s0 = init_particles(rho0, Ns[i]);
    init[i] = density_from_particles(s0);
    const auto traj = evolve(s0, model, T, outputTimes, ctl);
    for (double t : outputTimes)
      dens[i].push_back(density_from_particles(traj.snapshotAt(t).state));
  });
  auto indexOf = [&](int N) {
    return static_cast<std::size_t>(std::lower_bound(Ns.begin(), Ns.end(), N) - Ns.begin());
  };

  CauchyStudy study;
  study.times = outputTimes;
  for (std::size_t k = 0; k < outputTimes.size(); ++k) {
    std::vector<double> a, b, g;
    for (auto [M, N] : pairs) {
      const auto iM = indexOf(M), iN = indexOf(N);
      a.push_back(l1_distance(init[iM], init[iN]));
      b.push_back(std::sqrt(1.0 / M + 1.0 / N));
      g.push_back(l1_distance(dens[iM][k], dens[iN][k]));
    }
    const auto [K, L] = detail::dominating_envelope(a, b, g);
    study.K.push_back(K);
    study.L.push_back(L);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double env = K * a[p] + L * b[p];
      study.rows.push_back(
          {pairs[p].first, pairs[p].second, outputTimes[k], g[p], a[p], b[p], env, env - g[p]});
    }
  }
  auto monotone = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < v[i - 1] * 0.95 - 1e-12) return false;
    return true;
  };
  study.kMonotone = monotone(study.K);
  study.lMonotone = monotone(study.L);
  return study;
}

struct FrontRateStudy {
  std::vector<StudyRow> rows;
  RateFit fit;                 // sup-over-time error vs 2^-nu
  bool boundHolds = true;      // termwise bound at every (nu, t)
  double fC2 = 0.0;            // sampled sup of |f|, |f'|, |f''|
  double B0 = 0.0;             // TV of the datum
  std::vector<int> nus;
};

/// Front tracking self-convergence: reference = finest nu in the list.
/// Termwise bound check: error(nu, t) <= ||u0^nu - u0||_1 + 2^-nu B0 ||f||_C2 t.
inline FrontRateStudy front_tracking_rate_study(const LocalFlux& flux,
                                                const PiecewiseConstantFn& u0,
                                                std::vector<int> nuList, double T,
                                                std::vector<double> outputTimes, int jobs = 1,
                                                std::size_t eventBudget = 1000000) {
  if (nuList.size() < 2)
    throw std::invalid_argument("front_tracking_rate_study: need at least 2 resolutions");
  std::sort(nuList.begin(), nuList.end());
  std::sort(outputTimes.begin(), outputTimes.end());

  FrontRateStudy study;
  study.nus = nuList;
  study.B0 = u0.totalVariation();
  double R0 = u0.supNorm();
  {
    // sampled sup of |f|, |f'|, |f''| on [-R0, R0] clipped to the box
    const double lo = std::max(-R0, flux.box.uLo), hi = std::min(R0, flux.box.uHi);
    double s = 0.0;
    for (int i = 0; i <= 4096; ++i) {
      const double uu = lo + (hi - lo) * i / 4096;
      s = std::max({s, std::abs(flux.f(uu)), std::abs(flux.df(uu)), std::abs(flux.ddf(uu))});
    }
    study.fC2 = s;
  }

  std::vector<std::vector<PiecewiseConstantFn>> samples(nuList.size());
  std::vector<double> initErr(nuList.size());
  parallel_for(nuList.size(), jobs, [&](std::size_t i) {
    const auto u0nu = discretize_to_grid(u0, nuList[i]);
    initErr[i] = l1_distance(u0nu, u0);
    const auto traj = front_track(flux, nuList[i], u0nu, T, eventBudget);
    for (double t : outputTimes) samples[i].push_back(traj.sample(t));
  });

  const auto& ref = samples.back();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i + 1 < nuList.size(); ++i) {
    const double quantum = std::ldexp(1.0, -nuList[i]);
    double sup = 0.0;
    for (std::size_t k = 0; k < outputTimes.size(); ++k) {
      const double err = l1_distance(samples[i][k], ref[k]);
      const double bound = initErr[i] + quantum * study.B0 * study.fC2 * outputTimes[k];
      sup = std::max(sup, err);
      if (err > bound + 1e-12) study.boundHolds = false;
      study.rows.push_back(
          {quantum, outputTimes[k], err, bound, bound - err});
    }
    pts.push_back({quantum, std::max(sup, 1e-300)});
  }
  study.fit = rate_fit(pts);
  return study;
}

struct ViscosityRateStudy {
  std::vector<StudyRow> rows;
  RateFit fit;  // sup-over-time error vs eps
  std::vector<double> epsList;
  int referenceNu = 0;
};

/// Viscous solutions against a front-tracking reference; grid spacing is
/// tied to eps (h = hFactor * eps) so the discretization error stays
/// subdominant along the ladder.
template <class Flux>
ViscosityRateStudy viscosity_rate_study(const Flux& fastFlux, const LocalFlux& flux,
                                        const PiecewiseConstantFn& u0,
                                        std::vector<double> epsList, double T,
                                        std::vector<double> outputTimes, int refNu = 12,
                                        double hFactor = 0.25, int jobs = 1) {
  if (epsList.size() < 3)
    throw std::invalid_argument("viscosity_rate_study: need at least 3 resolutions");
  std::sort(epsList.begin(), epsList.end(), std::greater<double>());
  std::sort(outputTimes.begin(), outputTimes.end());

  ViscosityRateStudy study;
  study.epsList = epsList;
  study.referenceNu = refNu;
  const auto refTraj = front_track(flux, refNu, discretize_to_grid(u0, refNu), T);
  std::vector<PiecewiseConstantFn> ref;
  for (double t : outputTimes) ref.push_back(refTraj.sample(t));

  std::vector<std::vector<double>> errs(epsList.size());
  parallel_for(epsList.size(), jobs, [&](std::size_t i) {
    const double eps = epsList[i];
    const auto sol = viscous_solve(fastFlux, eps, u0, T, outputTimes, hFactor * eps);
    for (std::size_t k = 0; k < outputTimes.size(); ++k)
      errs[i].push_back(l1_distance(sol.sample(outputTimes[k]), ref[k]));
  });

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < epsList.size(); ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k < outputTimes.size(); ++k) {
      sup = std::max(sup, errs[i][k]);
      study.rows.push_back({epsList[i], outputTimes[k], errs[i][k],
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});
    }
    pts.push_back({epsList[i], sup});
  }
  study.fit = rate_fit(pts);
  return study;
}

/// Initialization bound of the quantile placement, exact inequality:
/// ||rho0^N - rho0||_1 <= (2 S0 + B0) / sqrt(2 N) with S0 the support radius
/// and B0 the total variation.
struct InitBoundRow {
  int N;
  double error;
  double bound;
};

inline std::vector<InitBoundRow> initialization_bound_sweep(const PiecewiseConstantFn& rho0,
                                                            const std::vector<int>& Nlist) {
  auto [lo, hi] = rho0.supportHull();
  const double S0 = std::max(std::abs(lo), std::abs(hi));
  const double B0 = rho0.totalVariation();
  std::vector<InitBoundRow> rows;
  for (int N : Nlist) {
    const auto s = init_particles(rho0, N);
    const double err = l1_distance(density_from_particles(s), rho0);
    rows.push_back({N, err, (2.0 * S0 + B0) / std::sqrt(2.0 * N)});
  }
  return rows;
}

}  // namespace clawlab
