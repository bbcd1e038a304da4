#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "clawlab/convolution.hpp"
#include "clawlab/fields.hpp"
#include "clawlab/particles.hpp"
#include "clawlab/piecewise_constant.hpp"

namespace clawlab {

// Concrete flux functors for the viscous solver's hot loop.

struct BurgersFlux {
  double value(double, double, double u) const { return 0.5 * u * u; }
  double du(double, double, double u) const { return u; }
  double div2(double, double, double) const { return 0.0; }
  const std::array<double, 1>& criticalPoints() const {
    static constexpr std::array<double, 1> c = {0.0};
    return c;
  }
};

struct TransportFlux {
  double c = 1.0;
  double value(double, double, double u) const { return c * u; }
  double du(double, double, double) const { return c; }
  double div2(double, double, double) const { return 0.0; }
  const std::array<double, 0>& criticalPoints() const {
    static constexpr std::array<double, 0> none = {};
    return none;
  }
};

struct LwrFlux {
  double value(double, double, double u) const { return u * std::max(1.0 - u, 0.0); }
  double du(double, double, double u) const { return u < 1.0 ? 1.0 - 2.0 * u : 0.0; }
  double div2(double, double, double) const { return 0.0; }
  const std::array<double, 1>& criticalPoints() const {
    static constexpr std::array<double, 1> c = {0.5};
    return c;
  }
};

struct ZeroFlux {
  double value(double, double, double) const { return 0.0; }
  double du(double, double, double) const { return 0.0; }
  double div2(double, double, double) const { return 0.0; }
  const std::array<double, 0>& criticalPoints() const {
    static constexpr std::array<double, 0> none = {};
    return none;
  }
};

/// Separable space-time flux P(t,x,u) = g(u) A(t,x). Every flux in this
/// laboratory has this form: local fluxes have A ≡ 1 and the non-local
/// particle flux freezes A(t,x) = V(t,x) - (∂xW * ρ̄(t))(x). The stability
/// machinery exploits the factorization when sampling localized Lipschitz
/// constants.
struct SeparableFlux {
  std::string name;
  Fn1 g, dg;
  Fn2 A, dxA;
  bool constA = true;
  std::vector<double> gCritical;
  ValidityBox box;

  double value(double t, double x, double u) const {
    return g(u) * (constA ? 1.0 : A(t, x));
  }
  double du(double t, double x, double u) const {
    return dg(u) * (constA ? 1.0 : A(t, x));
  }
  double div2(double t, double x, double u) const {
    return constA ? 0.0 : g(u) * dxA(t, x);
  }
  const std::vector<double>& criticalPoints() const { return gCritical; }
};

inline SeparableFlux separable_from_local(const LocalFlux& f) {
  SeparableFlux P;
  P.name = f.name;
  P.g = f.f;
  P.dg = f.df;
  P.constA = true;
  P.A = [](double, double) { return 1.0; };
  P.dxA = [](double, double) { return 0.0; };
  P.gCritical = f.criticalPoints;
  P.box = f.box;
  return P;
}

namespace detail {

/// Per-time density cache for fluxes frozen along a particle trajectory.
struct FrozenFieldCache {
  std::mutex m;
  double t = std::numeric_limits<double>::quiet_NaN();
  PiecewiseConstantFn rho;
};

}  // namespace detail

/// The non-local flux J^N(t,x,u) = m(u) [V(t,x) - (∂xW * ρ̄^N)(t,x)] frozen
/// along a computed particle trajectory: the convolution field is read off
/// the trajectory's reconstructed density at each time.
inline SeparableFlux frozen_particle_flux(std::shared_ptr<const ParticleTrajectory> traj,
                                          std::string name = {}) {
  const ParticleModel& m = traj->model();
  SeparableFlux P;
  P.name = name.empty() ? "particle-flux" : std::move(name);
  const Mobility mob = m.mobility;
  P.g = [mob](double u) { return u * mob.value(u); };
  P.dg = [mob](double u) { return mob.value(u) + u * mob.deriv(u); };
  P.gCritical = mob.fluxCriticalPoints;
  P.box = m.velocity.box;
  P.box.uLo = mob.box.uLo;
  P.box.uHi = mob.box.uHi;
  P.constA = false;
  auto cache = std::make_shared<detail::FrozenFieldCache>();
  const VelocityField V = m.velocity;
  const Kernel W = m.kernel;
  auto density = [traj, cache](double t) {
    std::lock_guard<std::mutex> lock(cache->m);
    if (!(cache->t == t)) {
      cache->rho = traj->densityAt(t);
      cache->t = t;
    }
    return cache->rho;
  };
  P.A = [V, W, density](double t, double x) {
    double a = V.isZero ? 0.0 : V.value(t, x);
    if (!W.isZero) a -= kernel_convolution_dx(density(t), W, t, x);
    return a;
  };
  P.dxA = [V, W, density](double t, double x) {
    double a = V.isZero ? 0.0 : V.dx(t, x);
    if (!W.isZero) a -= kernel_convolution_dxx(density(t), W, t, x);
    return a;
  };
  return P;
}

}  // namespace clawlab
