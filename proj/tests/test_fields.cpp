#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clawlab/fields.hpp"

using namespace clawlab;

namespace {

// centered finite difference avoiding kinks and box edges
template <class F>
void checkDeriv1(F&& f, F&& df, double lo, double hi, const std::vector<double>& kinks,
                 double relTol = 1e-6) {
  const double h = 1e-7 * std::max(1.0, hi - lo);
  for (int i = 0; i <= 64; ++i) {
    const double u = lo + (hi - lo) * i / 64.0;
    if (u - h < lo || u + h > hi) continue;
    bool nearKink = false;
    for (double k : kinks)
      if (std::abs(u - k) < 16 * h) nearKink = true;
    if (nearKink) continue;
    const double fd = (f(u + h) - f(u - h)) / (2 * h);
    const double an = df(u);
    REQUIRE(fd == Catch::Approx(an).margin(relTol * (1.0 + std::abs(an))));
  }
}

void checkField(const Fn2& f, const Fn2& df, double lo, double hi, double relTol = 1e-6) {
  const double h = 1e-6 * std::max(1.0, hi - lo);
  for (int i = 0; i <= 64; ++i) {
    const double x = lo + (hi - lo) * i / 64.0;
    const double fd = (f(0.3, x + h) - f(0.3, x - h)) / (2 * h);
    const double an = df(0.3, x);
    REQUIRE(fd == Catch::Approx(an).margin(relTol * (1.0 + std::abs(an))));
  }
}

}  // namespace

TEST_CASE("preset name parsing", "[fields]") {
  REQUIRE(presets::mobility("linear-congestion").name == "linear-congestion");
  REQUIRE(presets::velocity("const-V(2.5)").value(0, 0) == 2.5);
  REQUIRE_THROWS_AS(presets::velocity("const-V"), std::invalid_argument);
  REQUIRE_THROWS_AS(presets::kernel("gaussian-kernel(-1)"), std::invalid_argument);
  REQUIRE_THROWS_AS(presets::mobility("no-such-preset"), std::invalid_argument);
  REQUIRE(presets::kernel("gaussian-kernel(0.5)").name == "gaussian-kernel(0.5)");
}

TEST_CASE("every preset derivative matches finite differences", "[fields]") {
  SECTION("mobilities") {
    for (const char* name : {"linear-congestion", "unit-mobility"}) {
      const auto m = presets::mobility(name);
      checkDeriv1(m.value, m.deriv, m.box.uLo, std::min(m.box.uHi, 4.0), m.kinks);
    }
  }
  SECTION("velocities") {
    for (const char* name : {"zero-V", "const-V(1.5)", "sin-V(0.8,2)"}) {
      const auto V = presets::velocity(name);
      checkField(V.value, V.dx, -3.0, 3.0);
      checkField(V.dx, V.dxx, -3.0, 3.0);
    }
  }
  SECTION("kernels") {
    for (const char* name : {"zero-kernel", "gaussian-kernel(0.5)", "quadratic-kernel"}) {
      const auto W = presets::kernel(name);
      const double lo = std::max(W.box.xLo, -3.0), hi = std::min(W.box.xHi, 3.0);
      checkField(W.value, W.dx, lo, hi);
      checkField(W.dx, W.dxx, lo, hi);
    }
  }
  SECTION("local fluxes") {
    for (const char* name : {"burgers", "lwr", "transport(0.7)"}) {
      const auto F = presets::localFlux(name);
      checkDeriv1(F.f, F.df, F.box.uLo, F.box.uHi, F.kinks);
      checkDeriv1(F.df, F.ddf, F.box.uLo, F.box.uHi, F.kinks, 1e-5);
    }
  }
}

TEST_CASE("declared bounds dominate sampled sups on the validity box", "[fields]") {
  const auto W = presets::kernel("gaussian-kernel(0.4)");
  double sup = 0, dsup = 0, ddsup = 0;
  for (int i = 0; i <= 2048; ++i) {
    const double x = -4.0 + 8.0 * i / 2048;
    sup = std::max(sup, std::abs(W.value(0, x)));
    dsup = std::max(dsup, std::abs(W.dx(0, x)));
    ddsup = std::max(ddsup, std::abs(W.dxx(0, x)));
  }
  REQUIRE(sup <= W.supBound * (1 + 1e-12));
  REQUIRE(dsup <= W.dxBound * (1 + 1e-12));
  REQUIRE(ddsup <= W.dxxBound * (1 + 1e-12));
}

TEST_CASE("catalog lists the documented presets", "[fields]") {
  const auto names = presets::catalog();
  REQUIRE(std::find(names.begin(), names.end(), "linear-congestion") != names.end());
  REQUIRE(std::find(names.begin(), names.end(), "burgers") != names.end());
  REQUIRE(std::find(names.begin(), names.end(), "lwr") != names.end());
}
