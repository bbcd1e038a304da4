#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clawlab/convolution.hpp"
#include "clawlab/fields.hpp"
#include "clawlab/piecewise_constant.hpp"
#include "clawlab/quadrature.hpp"

namespace clawlab {

/// N+1 sorted particle positions at a time instant. Cell i = (x_{i-1}, x_i)
/// carries the reciprocal-gap density 1/(N (x_i - x_{i-1})).
struct ParticleState {
  std::vector<double> x;  // strictly increasing, length N+1
  double t = 0.0;

  int cells() const { return static_cast<int>(x.size()) - 1; }
  double minGap() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < x.size(); ++i) g = std::min(g, x[i + 1] - x[i]);
    return g;
  }
  bool ordered() const {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (!(x[i] < x[i + 1])) return false;
    return true;
  }
};

struct ParticleCollision : std::runtime_error {
  ParticleCollision(double time, int left, int right)
      : std::runtime_error("particle collision imminent at t=" + std::to_string(time) +
                           " between particles " + std::to_string(left) + " and " +
                           std::to_string(right)),
        t(time), i(left), j(right) {}
  double t;
  int i, j;
};

struct ValidityEscape : std::runtime_error {
  explicit ValidityEscape(const std::string& what) : std::runtime_error(what) {}
};

/// Model triple consumed by the particle scheme.
struct ParticleModel {
  Mobility mobility;
  VelocityField velocity;
  Kernel kernel;
};

inline ParticleModel particleModel(const ModelSpec& spec) {
  return ParticleModel{spec.mobility, spec.velocity, spec.kernel};
}

/// Output of the discrete velocity assembly at one time instant.
struct DiscreteVelocities {
  std::vector<double> Ubar;  // U_i = V(t,x_i) - sum_j (rho_{j+1}-rho_j) W(t, x_i-x_j)
  std::vector<double> vmob;  // upwind mobility: v(rho_i) if U_i < 0 else v(rho_{i+1})
  std::vector<double> rhs;   // x_i' = vmob_i * Ubar_i
};

namespace detail {

/// rho_1..rho_N from the gaps; rho_0 = rho_{N+1} = 0 by convention.
inline void gapDensities(const std::vector<double>& x, std::vector<double>& rho) {
  const int N = static_cast<int>(x.size()) - 1;
  rho.assign(N + 2, 0.0);
  for (int i = 1; i <= N; ++i) rho[i] = 1.0 / (N * (x[i] - x[i - 1]));
}

}  // namespace detail

/// Assemble the right-hand side of the particle ODE. The interaction sum
/// runs j = 0..N over rho_{j+1} - rho_j with vanishing exterior densities;
/// it equals the continuous convolution (∂xW * ρ̄)(t, x_i) exactly, by
/// summation by parts.
inline DiscreteVelocities discrete_velocities(const ParticleState& s, const ParticleModel& m) {
  const int N = s.cells();
  DiscreteVelocities out;
  out.Ubar.resize(N + 1);
  out.vmob.resize(N + 1);
  out.rhs.resize(N + 1);
  std::vector<double> rho;
  detail::gapDensities(s.x, rho);
  std::vector<double> drho(N + 1);
  for (int j = 0; j <= N; ++j) drho[j] = rho[j + 1] - rho[j];

  const bool haveKernel = !m.kernel.isZero;
  const bool haveVelocity = !m.velocity.isZero;
  for (int i = 0; i <= N; ++i) {
    double U = haveVelocity ? m.velocity.value(s.t, s.x[i]) : 0.0;
    if (haveKernel) {
      double conv = 0.0;
      const double xi = s.x[i];
      for (int j = 0; j <= N; ++j) conv += drho[j] * m.kernel.value(s.t, xi - s.x[j]);
      U -= conv;
    }
    out.Ubar[i] = U;
    out.vmob[i] = (U < 0.0) ? m.mobility.value(rho[i]) : m.mobility.value(rho[i + 1]);
    out.rhs[i] = out.vmob[i] * U;
  }
  return out;
}

/// Reconstruct the piecewise constant density; each cell has mass 1/N by
/// construction, so the total mass is 1.
inline PiecewiseConstantFn density_from_particles(const ParticleState& s) {
  const int N = s.cells();
  std::vector<double> vals(N);
  for (int i = 0; i < N; ++i) vals[i] = 1.0 / (N * (s.x[i + 1] - s.x[i]));
  return PiecewiseConstantFn(s.x, vals);
}

/// Quantile initialization: x_0, x_N span the convex hull of supp(rho0) and
/// every interior cell carries exact mass 1/N, solved cell by cell in closed
/// form. Ties at zero-density gaps resolve to the left endpoint of the gap.
inline ParticleState init_particles(const PiecewiseConstantFn& rho0, int N) {
  if (N < 1) throw std::invalid_argument("init_particles: N must be >= 1");
  if (std::abs(rho0.mass() - 1.0) > 1e-12)
    throw std::invalid_argument("init_particles: datum must have unit mass");
  for (double v : rho0.values())
    if (v < 0.0) throw std::invalid_argument("init_particles: datum must be non-negative");
  bool ok = false;
  auto [lo, hi] = rho0.supportHull(&ok);
  if (!ok) throw std::invalid_argument("init_particles: datum has empty support");

  const auto& b = rho0.breakpoints();
  const auto& v = rho0.values();
  ParticleState s;
  s.t = 0.0;
  s.x.resize(N + 1);
  s.x[0] = lo;
  s.x[N] = hi;
  std::size_t c = 0;
  while (b[c] < lo) ++c;  // first support cell
  double cum = 0.0;
  for (int k = 1; k < N; ++k) {
    const double target = static_cast<double>(k) / N;
    while (c + 1 < v.size() && cum + v[c] * (b[c + 1] - b[c]) < target) {
      cum += v[c] * (b[c + 1] - b[c]);
      ++c;
    }
    const double need = target - cum;
    s.x[k] = (v[c] > 0.0 && need > 0.0) ? b[c] + need / v[c] : b[c];
  }
  if (!s.ordered())
    throw std::runtime_error("init_particles: quantiles produced a degenerate gap");
  return s;
}

/// Step-control parameters for the adaptive RK4 integrator.
struct StepControl {
  double tolerance = 1e-8;        // step-doubling error per unit time
  double gapFactor = 0.5;         // accepted steps keep min gap >= factor * entry gap
  double minStepFraction = 1e-13; // abort threshold relative to the horizon
  double initialStep = 0.0;       // 0: use T/64
  double maxStep = 0.0;           // 0: unbounded
};

struct TrajectorySnapshot {
  ParticleState state;
  std::vector<double> xdot;  // recomputed right-hand side at the snapshot
};

struct StepDiagnostics {
  double t;
  double stepSize;
  double minGap;
  double maxDensity;
};

/// Result of evolve(): output snapshots plus the dense skeleton of accepted
/// steps, from which states at arbitrary times are re-integrated (positions
/// are never interpolated across accepted steps). Immutable once returned.
class ParticleTrajectory {
 public:
  ParticleTrajectory(ParticleModel model, StepControl control)
      : model_(std::move(model)), control_(control) {}

  const ParticleModel& model() const { return model_; }
  const StepControl& control() const { return control_; }
  const std::vector<TrajectorySnapshot>& snapshots() const { return snapshots_; }
  const std::vector<StepDiagnostics>& diagnostics() const { return diagnostics_; }
  const std::vector<std::pair<double, std::vector<double>>>& skeleton() const {
    return skeleton_;
  }
  double horizon() const { return skeleton_.empty() ? 0.0 : skeleton_.back().first; }

  const TrajectorySnapshot& snapshotAt(double t, double tol = 1e-9) const {
    for (const auto& s : snapshots_)
      if (std::abs(s.state.t - t) <= tol) return s;
    throw std::invalid_argument("no stored snapshot at t=" + std::to_string(t));
  }

  /// State at an arbitrary time in [0, horizon], re-integrated from the
  /// nearest accepted step.
  ParticleState stateAt(double t) const;

  TrajectorySnapshot sampleWithDerivatives(double t) const {
    TrajectorySnapshot snap;
    snap.state = stateAt(t);
    snap.xdot = discrete_velocities(snap.state, model_).rhs;
    return snap;
  }

  PiecewiseConstantFn densityAt(double t) const { return density_from_particles(stateAt(t)); }

 private:
  friend ParticleTrajectory evolve(const ParticleState&, const ParticleModel&, double,
                                   std::vector<double>, StepControl);
  ParticleModel model_;
  StepControl control_;
  std::vector<TrajectorySnapshot> snapshots_;
  std::vector<StepDiagnostics> diagnostics_;
  std::vector<std::pair<double, std::vector<double>>> skeleton_;
};

namespace detail {

inline void rhsInto(const std::vector<double>& x, double t, const ParticleModel& m,
                    std::vector<double>& out) {
  ParticleState tmp;
  tmp.x = x;
  tmp.t = t;
  out = discrete_velocities(tmp, m).rhs;
}

/// One classical RK4 step; the upwind branch is re-evaluated inside every
/// stage. Returns false if any stage state loses strict ordering.
inline bool rk4Step(const std::vector<double>& x0, double t, double h, const ParticleModel& m,
                    std::vector<double>& out) {
  const std::size_t n = x0.size();
  auto orderedVec = [](const std::vector<double>& p) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
      if (!(p[i] < p[i + 1])) return false;
    return true;
  };
  std::vector<double> k1, k2, k3, k4, stage(n);
  rhsInto(x0, t, m, k1);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x0[i] + 0.5 * h * k1[i];
  if (!orderedVec(stage)) return false;
  rhsInto(stage, t + 0.5 * h, m, k2);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x0[i] + 0.5 * h * k2[i];
  if (!orderedVec(stage)) return false;
  rhsInto(stage, t + 0.5 * h, m, k3);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x0[i] + h * k3[i];
  if (!orderedVec(stage)) return false;
  rhsInto(stage, t + h, m, k4);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return orderedVec(out);
}

inline void checkValidity(const std::vector<double>& x, double t, const ParticleModel& m) {
  if (!m.velocity.isZero) {
    if (!m.velocity.box.containsX(x.front()) || !m.velocity.box.containsX(x.back()))
      throw ValidityEscape("particle left the validity box of velocity preset '" +
                           m.velocity.name + "' at t=" + std::to_string(t));
  }
  if (!m.kernel.isZero) {
    const double span = x.back() - x.front();
    if (!m.kernel.box.containsX(span) || !m.kernel.box.containsX(-span))
      throw ValidityEscape("particle span escaped the validity box of kernel preset '" +
                           m.kernel.name + "' at t=" + std::to_string(t));
  }
}

inline std::pair<int, int> tightestPair(const std::vector<double>& x) {
  int arg = 0;
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i + 1] - x[i] < g) {
      g = x[i + 1] - x[i];
      arg = static_cast<int>(i);
    }
  return {arg, arg + 1};
}

}  // namespace detail

/// Explicit RK4 with step-doubling error control. A step is accepted only if
/// the doubled-step estimate is below tolerance*h and the ordering survives
/// with min gap >= gapFactor * (entry min gap). Snapshots at the requested
/// output times are produced by re-integration from the latest accepted step.
inline ParticleTrajectory evolve(const ParticleState& state0, const ParticleModel& model,
                                 double T, std::vector<double> outputTimes,
                                 StepControl control = {}) {
  if (!(T > 0)) throw std::invalid_argument("evolve: horizon must be positive");
  if (!state0.ordered()) throw std::invalid_argument("evolve: initial state not sorted");
  std::sort(outputTimes.begin(), outputTimes.end());
  for (double tau : outputTimes)
    if (tau < 0.0 || tau > T + 1e-12)
      throw std::invalid_argument("evolve: output time outside [0, T]");

  ParticleTrajectory traj(model, control);
  std::vector<double> x = state0.x;
  double t = 0.0;
  detail::checkValidity(x, t, model);
  traj.skeleton_.push_back({t, x});

  std::size_t nextOut = 0;
  auto takeSnapshot = [&](double tau, const std::vector<double>& pos) {
    TrajectorySnapshot snap;
    snap.state.x = pos;
    snap.state.t = tau;
    snap.xdot = discrete_velocities(snap.state, model).rhs;
    traj.snapshots_.push_back(std::move(snap));
  };
  while (nextOut < outputTimes.size() && outputTimes[nextOut] <= 0.0) {
    takeSnapshot(0.0, x);
    ++nextOut;
  }

  double h = control.initialStep > 0 ? control.initialStep : T / 64.0;
  if (control.maxStep > 0) h = std::min(h, control.maxStep);
  const double hMin = control.minStepFraction * T;

  std::vector<double> full, halfMid, half2;
  while (t < T - 1e-15 * T) {
    h = std::min(h, T - t);
    bool ok = detail::rk4Step(x, t, h, model, full) &&
              detail::rk4Step(x, t, 0.5 * h, model, halfMid) &&
              detail::rk4Step(halfMid, t + 0.5 * h, 0.5 * h, model, half2);
    double err = 0.0;
    if (ok) {
      for (std::size_t i = 0; i < x.size(); ++i)
        err = std::max(err, std::abs(full[i] - half2[i]));
      err /= 15.0;
      ParticleState cand;
      cand.x = half2;
      const double entryGap = ParticleState{x, t}.minGap();
      ok = err <= control.tolerance * h && cand.minGap() >= control.gapFactor * entryGap &&
           ParticleState{halfMid, t}.minGap() >= control.gapFactor * entryGap;
    }
    if (!ok) {
      h *= 0.5;
      if (h < hMin) {
        auto [i, j] = detail::tightestPair(x);
        throw ParticleCollision(t, i, j);
      }
      continue;
    }

    // snapshots inside (t, t+h]: dense re-integration from the step start
    while (nextOut < outputTimes.size() && outputTimes[nextOut] <= t + h + 1e-15 * T) {
      const double tau = std::min(outputTimes[nextOut], t + h);
      const double sub = 0.5 * (tau - t);
      std::vector<double> mid, at;
      if (sub > 0) {
        if (!detail::rk4Step(x, t, sub, model, mid) ||
            !detail::rk4Step(mid, t + sub, sub, model, at))
          throw ParticleCollision(tau, detail::tightestPair(x).first,
                                  detail::tightestPair(x).second);
      } else {
        at = x;
      }
      takeSnapshot(tau, at);
      ++nextOut;
    }

    t += h;
    x.swap(half2);
    detail::checkValidity(x, t, model);
    traj.skeleton_.push_back({t, x});
    std::vector<double> rho;
    detail::gapDensities(x, rho);
    traj.diagnostics_.push_back(
        {t, h, ParticleState{x, t}.minGap(), *std::max_element(rho.begin(), rho.end())});

    double fac = (err > 0) ? 0.9 * std::pow(control.tolerance * h / err, 0.25) : 2.0;
    fac = std::clamp(fac, 0.3, 2.0);
    h *= fac;
    if (control.maxStep > 0) h = std::min(h, control.maxStep);
  }
  return traj;
}

inline ParticleState ParticleTrajectory::stateAt(double t) const {
  if (skeleton_.empty()) throw std::logic_error("stateAt: empty trajectory");
  const double tEnd = skeleton_.back().first;
  if (t < -1e-12 || t > tEnd + 1e-9 * std::max(1.0, tEnd))
    throw std::invalid_argument("stateAt: time outside computed horizon");
  t = std::clamp(t, 0.0, tEnd);
  auto it = std::upper_bound(skeleton_.begin(), skeleton_.end(), t,
                             [](double tt, const auto& node) { return tt < node.first; });
  const auto& base = *(it - 1);
  ParticleState s;
  if (t - base.first <= 1e-15 * std::max(1.0, tEnd)) {
    s.x = base.second;
    s.t = base.first;
    return s;
  }
  const double sub = 0.5 * (t - base.first);
  std::vector<double> mid, at;
  if (!detail::rk4Step(base.second, base.first, sub, model_, mid) ||
      !detail::rk4Step(mid, base.first + sub, sub, model_, at))
    throw ParticleCollision(t, detail::tightestPair(base.second).first,
                            detail::tightestPair(base.second).second);
  s.x = std::move(at);
  s.t = t;
  return s;
}

// ---------------------------------------------------------------------------
// Quasi-entropy error measure of the particle scheme.
// ---------------------------------------------------------------------------

/// The explicit measure mu_1^N at a fixed time: an absolutely continuous
/// measure supported on the particle hull, with density
///   sum_i m(rho_i) |U(t,x) - U(t,x_{i-1})| 1_{[x_{i-1},x_i]}
/// + sum_i rho_i [ |x'_i - x'_{i-1}| + |x'_{i-1} - v(rho_i) U(t,x_{i-1})| ]
///     1_{[x_{i-1},x_i]},
/// where U is the continuous field V - ∂xW * ρ̄. mu_0^N is identically zero.
struct Mu1Measure {
  std::vector<double> breaks;      // particle positions
  std::vector<double> constPart;   // per-cell constant component of the density
  std::vector<double> mobPart;     // per-cell factor m(rho_i)
  std::vector<double> UbarLeft;    // U(t, x_{i-1}) per cell
  std::function<double(double)> Ubar;
  double totalMass = 0.0;

  double density(double x) const {
    if (breaks.empty() || x < breaks.front() || x > breaks.back()) return 0.0;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    std::size_t i = std::min(static_cast<std::size_t>(it - breaks.begin()),
                             breaks.size() - 1) - 1;
    return mobPart[i] * std::abs(Ubar(x) - UbarLeft[i]) + constPart[i];
  }
};

inline Mu1Measure mu1_measure(const TrajectorySnapshot& snap, const ParticleModel& model) {
  if (snap.xdot.size() != snap.state.x.size())
    throw std::invalid_argument("mu1_measure: snapshot lacks stored derivatives");
  const int N = snap.state.cells();
  const double t = snap.state.t;
  const auto rho = density_from_particles(snap.state);

  Mu1Measure mu;
  mu.breaks = snap.state.x;
  mu.constPart.resize(N);
  mu.mobPart.resize(N);
  mu.UbarLeft.resize(N);
  const VelocityField V = model.velocity;
  const Kernel W = model.kernel;
  mu.Ubar = [V, W, rho, t](double x) {
    double u = V.isZero ? 0.0 : V.value(t, x);
    if (!W.isZero) u -= kernel_convolution_dx(rho, W, t, x);
    return u;
  };

  double mass = 0.0;
  for (int i = 1; i <= N; ++i) {
    const double xl = snap.state.x[i - 1], xr = snap.state.x[i];
    const double ri = 1.0 / (N * (xr - xl));
    const double m_i = ri * model.mobility.value(ri);
    const double Ul = mu.Ubar(xl);
    const double kin = std::abs(snap.xdot[i] - snap.xdot[i - 1]) +
                       std::abs(snap.xdot[i - 1] - model.mobility.value(ri) * Ul);
    mu.mobPart[i - 1] = m_i;
    mu.constPart[i - 1] = ri * kin;
    mu.UbarLeft[i - 1] = Ul;
    mass += ri * kin * (xr - xl);
    if (m_i != 0.0)
      mass += m_i * gl5([&](double x) { return std::abs(mu.Ubar(x) - Ul); }, xl, xr);
  }
  mu.totalMass = mass;
  return mu;
}

/// mu1 measure at a stored snapshot time of a trajectory.
inline Mu1Measure quasi_entropy_measure(const ParticleTrajectory& traj, double t) {
  return mu1_measure(traj.snapshotAt(t), traj.model());
}

}  // namespace clawlab
