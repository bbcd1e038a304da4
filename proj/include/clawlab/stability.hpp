#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "clawlab/entropy.hpp"
#include "clawlab/flux.hpp"
#include "clawlab/quadrature.hpp"
#include "clawlab/weights.hpp"

namespace clawlab {

/// One side of a stability comparison: a sampler plus its tabulated
/// quasi-entropy budget masses (empty tables mean exact entropy solution).
struct StabilitySolution {
  SolutionSampler sampler;
  std::vector<double> budgetTimes;
  std::vector<double> mu0Mass;
  std::vector<double> mu1Mass;
};

struct StabilityOptions {
  int lipGrid = 512;      // sampling grid for the localized Lipschitz constants
  int timeNodes = 9;      // trapezoid nodes for the time integrals
  double c1 = 2.0;        // dimensional constant in 1-D (see report docs)
  double slopeTol = 1e-9;
  double checkTol = 1e-9;
};

/// Itemized evaluation of the weighted stability inequality between two
/// quasi-entropy solutions. All right-hand-side terms are recorded
/// separately so a violated bound can be attributed.
struct StabilityReport {
  double t1 = 0, t2 = 0;
  double lhs = 0;  // [∫|u-v|Θ dx] at t2 minus at t1

  double termIntegral = 0;   // ∫ [3Lip3(div2P)+Lip3(div2Q)] ∫|u-v|Θ dx dt
  double termDivDiff = 0;    // ∫∫ ||div2(P-Q)(t,x,.)||_{L∞([0,R])} Θ dx dt
  double termLip3Diff = 0;   // 2B(t2) ∫ ||Lip3((P-Q)(t,.)) Θ(t,.)||_∞ dt
  double termMu0 = 0;        // ||Θ||_∞ ∫ (μ0+ν0)(Ω_t) dt
  double termMu1 = 0;        // (1/2)||∇Θ||_∞ ∫ (μ1+ν1)(Ω_t) dt
  double termMinCorr = 0;    // C(t1,t2) min{ M^{1/2}, 1 }
  double termMaxCorr = 0;    // c1 ||Θ||_∞ max{ M^{1/2}, M }

  double M = 0;  // ∫_{t1}^{t2} (μ1+ν1)(Ω_t) dt
  double C = 0;  // the constant of the correction term

  bool satisfied = false;
  std::vector<std::string> hypothesisFailures;

  // per-time diagnostics (recorded so a failed bound can be re-run finer)
  std::vector<double> times, gap;
  std::vector<double> lip3div2P, lip3div2Q, lip2div2P, lip2du3Q, lip3diff;
  std::vector<double> t3profile, divDiffTheta, divDiffPlain;
  int lipGrid = 0;

  double rhsTotal() const {
    return termIntegral + termDivDiff + termLip3Diff + termMu0 + termMu1 + termMinCorr +
           termMaxCorr;
  }
};

namespace detail {

/// linear interpolation of a tabulated budget mass; zero outside the table
inline double interpTable(const std::vector<double>& ts, const std::vector<double>& ys,
                          double t) {
  if (ts.empty()) return 0.0;
  if (t <= ts.front()) return ys.front();
  if (t >= ts.back()) return ys.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
  return (1.0 - w) * ys[hi - 1] + w * ys[hi];
}

}  // namespace detail

/// Evaluate every term of the stability inequality for the pair (u, v) with
/// fluxes P, Q, budgets (μ0,μ1), (ν0,ν1) and weight Θ over [t1, t2].
///
/// Hypotheses checked (violations are reported, never silent): Θ satisfies
/// either the slope condition ∂tΘ <= -Lip3(Q(t)) |∂xΘ| (sampled) or the
/// compact-support dispensation (Θ ≡ 1 on the 1-enlarged supports); R and B
/// dominate the sampled sup norms and total variations on Ω_t.
///
/// The dimensional constant of the correction term is c1 = 2: in one
/// dimension it bounds ||ω'||_{L^1} for the standard quartic bump mollifier
/// ω(x) = (15/16)(1-x²)² (whose exact value is 15/8).
inline StabilityReport stability_bound(const StabilitySolution& u, const StabilitySolution& v,
                                       const SeparableFlux& P, const SeparableFlux& Q,
                                       const Weight& theta,
                                       const std::function<double(double)>& Rfun,
                                       const std::function<double(double)>& Bfun, double t1,
                                       double t2, StabilityOptions opt = {}) {
  if (!(t2 > t1)) throw std::invalid_argument("stability_bound: need t1 < t2");
  if (!theta.hasCompactSupport())
    throw std::invalid_argument("stability_bound: weight lacks compact support metadata");
  StabilityReport rep;
  rep.t1 = t1;
  rep.t2 = t2;
  rep.lipGrid = opt.lipGrid;

  const int G = opt.lipGrid;
  const int nT = std::max(3, opt.timeNodes);
  rep.times.resize(nT);
  for (int k = 0; k < nT; ++k) rep.times[k] = t1 + (t2 - t1) * k / (nT - 1);

  const bool timeIndependentTheta = !theta.dt;
  rep.gap.resize(nT);
  rep.lip3div2P.resize(nT);
  rep.lip3div2Q.resize(nT);
  rep.lip2div2P.resize(nT);
  rep.lip2du3Q.resize(nT);
  rep.lip3diff.resize(nT);
  rep.t3profile.resize(nT);
  rep.divDiffTheta.resize(nT);
  rep.divDiffPlain.resize(nT);

  std::vector<double> gPv(G + 1), dgPv(G + 1), gQv(G + 1), dgQv(G + 1);
  std::vector<double> AP(G + 1), dxAP(G + 1), AQ(G + 1), dxAQ(G + 1), thv(G + 1);

  for (int k = 0; k < nT; ++k) {
    const double t = rep.times[k];
    const PiecewiseConstantFn ut = u.sampler.at(t);
    const PiecewiseConstantFn vt = v.sampler.at(t);
    rep.gap[k] = weighted_l1_distance(ut, vt, theta, t);

    const double Rt = Rfun(t), Bt = Bfun(t);
    if (ut.supNorm() > Rt + opt.checkTol || vt.supNorm() > Rt + opt.checkTol)
      rep.hypothesisFailures.push_back("R(t) does not dominate sup norms at t=" +
                                       std::to_string(t));
    if (ut.totalVariation() > Bt + opt.checkTol || vt.totalVariation() > Bt + opt.checkTol)
      rep.hypothesisFailures.push_back("B(t) does not dominate total variations at t=" +
                                       std::to_string(t));

    if (timeIndependentTheta) {
      // compact-support dispensation: Θ ≡ 1 on the 1-enlarged supports
      if (!theta.hasPlateau())
        rep.hypothesisFailures.push_back("time-independent weight without plateau");
      else {
        auto hu = ut.hull();
        auto hv = vt.hull();
        const double lo = std::min(hu.first, hv.first) - 1.0;
        const double hi = std::max(hu.second, hv.second) + 1.0;
        if (lo < theta.plateauLo - opt.checkTol || hi > theta.plateauHi + opt.checkTol)
          rep.hypothesisFailures.push_back(
              "1-enlarged supports leave the Θ ≡ 1 plateau at t=" + std::to_string(t));
      }
    }

    // Ω_t = 1-enlargement of supp Θ(t, .)
    const double omLo = theta.supportLo - 1.0;
    const double omHi = theta.supportHi + 1.0;
    const double dx = (omHi - omLo) / G;
    const double du = Rt / G;

    for (int i = 0; i <= G; ++i) {
      const double uu = du * i;
      gPv[i] = P.g(uu);
      dgPv[i] = P.dg(uu);
      gQv[i] = Q.g(uu);
      dgQv[i] = Q.dg(uu);
    }
    for (int i = 0; i <= G; ++i) {
      const double x = omLo + dx * i;
      AP[i] = P.constA ? 1.0 : P.A(t, x);
      dxAP[i] = P.constA ? 0.0 : P.dxA(t, x);
      AQ[i] = Q.constA ? 1.0 : Q.A(t, x);
      dxAQ[i] = Q.constA ? 0.0 : Q.dxA(t, x);
      thv[i] = theta.value(t, x);
    }

    double lipUgP = 0, lipUgQ = 0, supGP = 0, supDgQ = 0;
    for (int i = 0; i <= G; ++i) {
      supGP = std::max(supGP, std::abs(gPv[i]));
      supDgQ = std::max(supDgQ, std::abs(dgQv[i]));
      if (i > 0) {
        lipUgP = std::max(lipUgP, std::abs(gPv[i] - gPv[i - 1]) / du);
        lipUgQ = std::max(lipUgQ, std::abs(gQv[i] - gQv[i - 1]) / du);
      }
    }
    double supDxAP = 0, supDxAQ = 0, lipXdxAP = 0, lipXAQ = 0;
    for (int i = 0; i <= G; ++i) {
      supDxAP = std::max(supDxAP, std::abs(dxAP[i]));
      supDxAQ = std::max(supDxAQ, std::abs(dxAQ[i]));
      if (i > 0) {
        lipXdxAP = std::max(lipXdxAP, std::abs(dxAP[i] - dxAP[i - 1]) / dx);
        lipXAQ = std::max(lipXAQ, std::abs(AQ[i] - AQ[i - 1]) / dx);
      }
    }
    rep.lip3div2P[k] = lipUgP * supDxAP;
    rep.lip3div2Q[k] = lipUgQ * supDxAQ;
    rep.lip2div2P[k] = supGP * lipXdxAP;
    rep.lip2du3Q[k] = supDgQ * lipXAQ;

    // Lip3 of the difference and its Θ-weighted profile:
    // per x, max over adjacent u of |Δg_P A_P(x) - Δg_Q A_Q(x)|/Δu
    double lip3diff = 0, t3prof = 0;
    for (int i = 0; i <= G; ++i) {
      double best = 0;
      for (int j = 1; j <= G; ++j) {
        const double num =
            std::abs((gPv[j] - gPv[j - 1]) * AP[i] - (gQv[j] - gQv[j - 1]) * AQ[i]);
        best = std::max(best, num / du);
      }
      lip3diff = std::max(lip3diff, best);
      t3prof = std::max(t3prof, best * thv[i]);
    }
    rep.lip3diff[k] = lip3diff;
    rep.t3profile[k] = t3prof;

    // ||div2(P-Q)(t,x,.)||_{L∞([0,R(t)])} profiles integrated in x
    double ddTheta = 0, ddPlain = 0;
    for (int i = 0; i <= G; ++i) {
      double best = 0;
      for (int j = 0; j <= G; ++j)
        best = std::max(best, std::abs(gPv[j] * dxAP[i] - gQv[j] * dxAQ[i]));
      const double w = (i == 0 || i == G) ? 0.5 * dx : dx;
      ddPlain += best * w;
      ddTheta += best * thv[i] * w;
    }
    rep.divDiffTheta[k] = ddTheta;
    rep.divDiffPlain[k] = ddPlain;

    // sampled slope condition for time-dependent weights
    if (!timeIndependentTheta) {
      const double lip3Q = lipUgQ * ([&] {
        double s = 0;
        for (int i = 0; i <= G; ++i) s = std::max(s, std::abs(AQ[i]));
        return s;
      }());
      for (int i = 0; i <= G; ++i) {
        const double x = omLo + dx * i;
        if (theta.dt(t, x) > -lip3Q * std::abs(theta.dx(t, x)) + opt.slopeTol) {
          rep.hypothesisFailures.push_back("slope condition fails at t=" + std::to_string(t) +
                                           ", x=" + std::to_string(x));
          break;
        }
      }
    }
  }

  // time integrals (trapezoid on the node grid)
  std::vector<double> integrand(nT);
  auto timeIntegral = [&](const std::function<double(int)>& f) {
    for (int k = 0; k < nT; ++k) integrand[k] = f(k);
    return trapezoid(rep.times.data(), integrand.data(), nT);
  };
  rep.termIntegral =
      timeIntegral([&](int k) { return (3.0 * rep.lip3div2P[k] + rep.lip3div2Q[k]) * rep.gap[k]; });
  rep.termDivDiff = timeIntegral([&](int k) { return rep.divDiffTheta[k]; });
  const double B2 = Bfun(t2);
  rep.termLip3Diff = 2.0 * B2 * timeIntegral([&](int k) { return rep.t3profile[k]; });

  // budget masses over the window, on the budgets' own tabulation
  auto budgetIntegral = [&](const std::vector<double>& ts, const std::vector<double>& ys) {
    if (ts.empty()) return 0.0;
    std::vector<double> tt{t1}, yy{detail::interpTable(ts, ys, t1)};
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ts[i] > t1 && ts[i] < t2) {
        tt.push_back(ts[i]);
        yy.push_back(ys[i]);
      }
    tt.push_back(t2);
    yy.push_back(detail::interpTable(ts, ys, t2));
    return trapezoid(tt.data(), yy.data(), tt.size());
  };
  const double mass0 = budgetIntegral(u.budgetTimes, u.mu0Mass) +
                       budgetIntegral(v.budgetTimes, v.mu0Mass);
  const double mass1 = budgetIntegral(u.budgetTimes, u.mu1Mass) +
                       budgetIntegral(v.budgetTimes, v.mu1Mass);
  rep.M = mass1;
  rep.termMu0 = theta.supNorm * mass0;
  rep.termMu1 = 0.5 * theta.dxSup * mass1;

  const double intC = timeIntegral(
      [&](int k) { return 3.0 * rep.lip3div2P[k] + rep.lip3div2Q[k] + 2.0 * rep.lip2du3Q[k]; });
  rep.C = theta.supNorm * B2 * (2.0 + intC) +
          theta.l1xNorm * timeIntegral([&](int k) { return rep.lip2div2P[k]; }) +
          theta.lipX * B2 * timeIntegral([&](int k) { return rep.lip3diff[k]; }) +
          0.5 * theta.lipX * timeIntegral([&](int k) { return rep.divDiffPlain[k]; });

  const double rootM = std::sqrt(rep.M);
  rep.termMinCorr = rep.C * std::min(rootM, 1.0);
  rep.termMaxCorr = opt.c1 * theta.supNorm * std::max(rootM, rep.M);

  rep.lhs = rep.gap.back() - rep.gap.front();
  rep.satisfied = rep.lhs <= rep.rhsTotal() + opt.checkTol * std::max(1.0, rep.rhsTotal());
  return rep;
}

/// Grönwall envelope (gap(t1) + Phi(t)) exp(∫_{t1}^{t} f) on a tabulated
/// rate; times[0] is t1 and Phi is aligned with times (empty = zero).
inline std::vector<double> gronwall_envelope(double initialGap,
                                             const std::vector<double>& times,
                                             const std::vector<double>& rate,
                                             const std::vector<double>& phi = {}) {
  if (times.size() < 1 || rate.size() != times.size())
    throw std::invalid_argument("gronwall_envelope: rate and times must align");
  if (!phi.empty() && phi.size() != times.size())
    throw std::invalid_argument("gronwall_envelope: Phi and times must align");
  for (double f : rate)
    if (f < 0) throw std::invalid_argument("gronwall_envelope: rate must be non-negative");
  std::vector<double> env(times.size());
  double acc = 0.0;
  env[0] = (initialGap + (phi.empty() ? 0.0 : phi[0]));
  for (std::size_t i = 1; i < times.size(); ++i) {
    acc += 0.5 * (rate[i - 1] + rate[i]) * (times[i] - times[i - 1]);
    env[i] = (initialGap + (phi.empty() ? 0.0 : phi[i])) * std::exp(acc);
  }
  return env;
}

}  // namespace clawlab
