#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clawlab {

/// Validity box of a preset: the (t,x,u) ranges on which its stated
/// derivative bounds hold. Unused axes are (-inf, inf).
struct ValidityBox {
  double tLo = 0.0, tHi = std::numeric_limits<double>::infinity();
  double xLo = -std::numeric_limits<double>::infinity();
  double xHi = std::numeric_limits<double>::infinity();
  double uLo = 0.0, uHi = std::numeric_limits<double>::infinity();

  bool containsX(double x) const { return x >= xLo && x <= xHi; }
  bool containsU(double u) const { return u >= uLo && u <= uHi; }
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;  // (t, x)

/// Congestion mobility v(rho).
struct Mobility {
  std::string name;
  Fn1 value;
  Fn1 deriv;
  ValidityBox box;
  double supBound = 1.0;    // sup |v| on box
  double derivBound = 1.0;  // sup |v'| on box
  std::vector<double> kinks;             // densities where v is not C^1
  std::vector<double> fluxCriticalPoints;  // zeros of m'(rho), m = rho*v(rho)
};

/// External velocity field V(t,x) with x-derivatives.
struct VelocityField {
  std::string name;
  bool isZero = false;
  Fn2 value;
  Fn2 dx;
  Fn2 dxx;
  ValidityBox box;
  double supBound = 0.0, dxBound = 0.0, dxxBound = 0.0;
};

/// Interaction kernel W(t,x). `value` doubles as the antiderivative of
/// `dx` in the spatial argument, which makes convolutions against step
/// functions exact.
struct Kernel {
  std::string name;
  bool isZero = false;
  Fn2 value;
  Fn2 dx;
  Fn2 dxx;
  ValidityBox box;
  double supBound = 0.0, dxBound = 0.0, dxxBound = 0.0;
  bool hasAntiderivative = true;
};

/// Local flux f(u) for front tracking and the viscous solver.
struct LocalFlux {
  std::string name;
  Fn1 f;
  Fn1 df;
  Fn1 ddf;
  ValidityBox box;  // u-range is the meaningful part
  std::vector<double> kinks;
  std::vector<double> criticalPoints;  // zeros of f' inside the box
};

/// The model triple (v, V, W) plus optional local flux; this is what the
/// particle scheme, the reference solvers and the stability machinery all
/// consume.
struct ModelSpec {
  Mobility mobility;
  VelocityField velocity;
  Kernel kernel;
  std::optional<LocalFlux> localFlux;
};

// ---------------------------------------------------------------------------
// Preset catalog. Presets are addressed by string names, optionally with
// parameters: "linear-congestion", "gaussian-kernel(0.5)", "const-V(1)",
// "sin-V(1,2)", "zero-V", "zero-kernel", "burgers", "lwr", "transport(c)".
// ---------------------------------------------------------------------------

namespace presets {

namespace detail {

inline std::vector<double> parseArgs(const std::string& name, std::size_t expect) {
  const auto open = name.find('(');
  std::vector<double> args;
  if (open != std::string::npos) {
    if (name.back() != ')') throw std::invalid_argument("preset '" + name + "': missing ')'");
    std::string inner = name.substr(open + 1, name.size() - open - 2);
    std::size_t pos = 0;
    while (pos < inner.size()) {
      auto comma = inner.find(',', pos);
      if (comma == std::string::npos) comma = inner.size();
      args.push_back(std::stod(inner.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  if (args.size() != expect)
    throw std::invalid_argument("preset '" + name + "': expected " + std::to_string(expect) +
                                " parameter(s)");
  return args;
}

inline std::string baseName(const std::string& name) {
  const auto open = name.find('(');
  return open == std::string::npos ? name : name.substr(0, open);
}

}  // namespace detail

/// v(rho) = max(1 - rho, 0); the classical linear congestion law. The
/// validity box is [0,1], where the mobility is exactly 1 - rho.
inline Mobility mobility(const std::string& name) {
  const std::string base = detail::baseName(name);
  if (base == "linear-congestion") {
    detail::parseArgs(name, 0);
    Mobility m;
    m.name = "linear-congestion";
    m.value = [](double r) { return std::max(1.0 - r, 0.0); };
    m.deriv = [](double r) { return r < 1.0 ? -1.0 : 0.0; };
    m.box.uLo = 0.0;
    m.box.uHi = 1.0;
    m.supBound = 1.0;
    m.derivBound = 1.0;
    m.kinks = {1.0};
    m.fluxCriticalPoints = {0.5};  // m(rho) = rho(1-rho) peaks at 1/2
    return m;
  }
  if (base == "unit-mobility") {
    detail::parseArgs(name, 0);
    Mobility m;
    m.name = "unit-mobility";
    m.value = [](double) { return 1.0; };
    m.deriv = [](double) { return 0.0; };
    m.box.uHi = std::numeric_limits<double>::infinity();
    m.supBound = 1.0;
    m.derivBound = 0.0;
    return m;
  }
  throw std::invalid_argument("unknown mobility preset '" + name + "'");
}

inline VelocityField velocity(const std::string& name) {
  const std::string base = detail::baseName(name);
  if (base == "zero-V") {
    detail::parseArgs(name, 0);
    VelocityField V;
    V.name = "zero-V";
    V.isZero = true;
    V.value = [](double, double) { return 0.0; };
    V.dx = V.value;
    V.dxx = V.value;
    return V;
  }
  if (base == "const-V") {
    const auto a = detail::parseArgs(name, 1);
    VelocityField V;
    V.name = name;
    const double c = a[0];
    V.isZero = (c == 0.0);
    V.value = [c](double, double) { return c; };
    V.dx = [](double, double) { return 0.0; };
    V.dxx = V.dx;
    V.supBound = std::abs(c);
    return V;
  }
  if (base == "sin-V") {
    const auto a = detail::parseArgs(name, 2);
    const double amp = a[0], freq = a[1];
    VelocityField V;
    V.name = name;
    V.value = [amp, freq](double, double x) { return amp * std::sin(freq * x); };
    V.dx = [amp, freq](double, double x) { return amp * freq * std::cos(freq * x); };
    V.dxx = [amp, freq](double, double x) { return -amp * freq * freq * std::sin(freq * x); };
    V.supBound = std::abs(amp);
    V.dxBound = std::abs(amp * freq);
    V.dxxBound = std::abs(amp * freq * freq);
    return V;
  }
  throw std::invalid_argument("unknown velocity preset '" + name + "'");
}

inline Kernel kernel(const std::string& name) {
  const std::string base = detail::baseName(name);
  if (base == "zero-kernel") {
    detail::parseArgs(name, 0);
    Kernel W;
    W.name = "zero-kernel";
    W.isZero = true;
    W.value = [](double, double) { return 0.0; };
    W.dx = W.value;
    W.dxx = W.value;
    return W;
  }
  if (base == "gaussian-kernel") {
    const auto a = detail::parseArgs(name, 1);
    const double sigma = a[0];
    if (!(sigma > 0)) throw std::invalid_argument("gaussian-kernel: sigma must be positive");
    Kernel W;
    W.name = name;
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    W.value = [norm, s2](double, double x) { return norm * std::exp(-0.5 * x * x / s2); };
    W.dx = [norm, s2](double, double x) {
      return -x / s2 * norm * std::exp(-0.5 * x * x / s2);
    };
    W.dxx = [norm, s2](double, double x) {
      return (x * x / (s2 * s2) - 1.0 / s2) * norm * std::exp(-0.5 * x * x / s2);
    };
    W.supBound = norm;
    W.dxBound = norm * std::exp(-0.5) / sigma;       // attained at |x| = sigma
    W.dxxBound = norm / s2;                          // attained at x = 0
    return W;
  }
  if (base == "quadratic-kernel") {
    // W(x) = x^2 on the validity box; handy in tests because the
    // interaction sum becomes hand-computable.
    detail::parseArgs(name, 0);
    Kernel W;
    W.name = "quadratic-kernel";
    W.value = [](double, double x) { return x * x; };
    W.dx = [](double, double x) { return 2.0 * x; };
    W.dxx = [](double, double) { return 2.0; };
    W.box.xLo = -8.0;
    W.box.xHi = 8.0;
    W.supBound = 64.0;
    W.dxBound = 16.0;
    W.dxxBound = 2.0;
    return W;
  }
  throw std::invalid_argument("unknown kernel preset '" + name + "'");
}

inline LocalFlux localFlux(const std::string& name) {
  const std::string base = detail::baseName(name);
  if (base == "burgers") {
    detail::parseArgs(name, 0);
    LocalFlux F;
    F.name = "burgers";
    F.f = [](double u) { return 0.5 * u * u; };
    F.df = [](double u) { return u; };
    F.ddf = [](double) { return 1.0; };
    F.box.uLo = -4.0;
    F.box.uHi = 4.0;
    F.criticalPoints = {0.0};
    return F;
  }
  if (base == "lwr") {
    // f(u) = u(1-u) on [0,1]: the LWR flux with unit free-flow speed.
    detail::parseArgs(name, 0);
    LocalFlux F;
    F.name = "lwr";
    F.f = [](double u) { return u * std::max(1.0 - u, 0.0); };
    F.df = [](double u) { return u < 1.0 ? 1.0 - 2.0 * u : 0.0; };
    F.ddf = [](double u) { return u < 1.0 ? -2.0 : 0.0; };
    F.box.uLo = 0.0;
    F.box.uHi = 1.0;
    F.kinks = {1.0};
    F.criticalPoints = {0.5};
    return F;
  }
  if (base == "transport") {
    const auto a = detail::parseArgs(name, 1);
    const double c = a[0];
    LocalFlux F;
    F.name = name;
    F.f = [c](double u) { return c * u; };
    F.df = [c](double) { return c; };
    F.ddf = [](double) { return 0.0; };
    F.box.uLo = -8.0;
    F.box.uHi = 8.0;
    return F;
  }
  throw std::invalid_argument("unknown flux preset '" + name + "'");
}

/// Names of every catalogued preset, for `presets` listings and docs.
inline std::vector<std::string> catalog() {
  return {"linear-congestion", "unit-mobility",      "zero-V",
          "const-V(c)",        "sin-V(a,k)",         "zero-kernel",
          "gaussian-kernel(s)", "quadratic-kernel",  "burgers",
          "lwr",               "transport(c)"};
}

}  // namespace presets

}  // namespace clawlab
