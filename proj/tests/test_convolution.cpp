#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "clawlab/convolution.hpp"

using namespace clawlab;

TEST_CASE("zero kernel gives zero", "[convolution]") {
  const auto W = presets::kernel("zero-kernel");
  const auto u = PiecewiseConstantFn::box(0.0, 1.0, 1.0);
  for (double x : {-1.0, 0.0, 0.3, 2.0}) REQUIRE(kernel_convolution_dx(u, W, 0.0, x) == 0.0);
}

TEST_CASE("narrow cell approximates the kernel derivative", "[convolution]") {
  const auto W = presets::kernel("gaussian-kernel(0.5)");
  for (double x : {-0.7, 0.2, 1.1}) {
    double prevErr = 0.0;
    for (double w : {1e-2, 1e-3}) {
      const auto u = PiecewiseConstantFn::box(-w / 2, w / 2, 1.0 / w);  // unit mass
      const double conv = kernel_convolution_dx(u, W, 0.0, x);
      const double err = std::abs(conv - W.dx(0.0, x));
      REQUIRE(err <= W.dxxBound * w);  // Lip(∂xW) * cell width
      if (prevErr > 0) REQUIRE(err < prevErr);
      prevErr = err;
    }
  }
}

TEST_CASE("even kernel, even datum, x = 0 gives zero", "[convolution]") {
  const auto W = presets::kernel("gaussian-kernel(0.7)");
  const auto u = PiecewiseConstantFn::box(-1.0, 1.0, 0.5);
  REQUIRE(std::abs(kernel_convolution_dx(u, W, 0.0, 0.0)) <= 1e-12);
}

TEST_CASE("antiderivative path agrees with quadrature path", "[convolution]") {
  auto W = presets::kernel("gaussian-kernel(0.5)");
  PiecewiseConstantFn u({-1.0, -0.2, 0.5, 1.0}, {0.3, 1.2, 0.4});
  auto Wq = W;
  Wq.hasAntiderivative = false;  // force per-cell Gauss-Legendre
  for (double x : {-1.5, 0.0, 0.4, 2.0}) {
    REQUIRE(kernel_convolution_dx(u, W, 0.0, x) ==
            Catch::Approx(kernel_convolution_dx(u, Wq, 0.0, x)).margin(1e-8));
    REQUIRE(kernel_convolution_dxx(u, W, 0.0, x) ==
            Catch::Approx(kernel_convolution_dxx(u, Wq, 0.0, x)).margin(1e-7));
  }
}

TEST_CASE("linearity in the datum", "[convolution]") {
  const auto W = presets::kernel("gaussian-kernel(0.6)");
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> val(-2.0, 2.0), sc(-1.5, 1.5);
  for (int it = 0; it < 50; ++it) {
    PiecewiseConstantFn u({-1.0, 0.0, 1.0}, {val(rng), val(rng)});
    PiecewiseConstantFn v({-0.5, 0.3, 0.8, 2.0}, {val(rng), val(rng), val(rng)});
    const double a = sc(rng), b = sc(rng);
    const auto mix = combine(u, v, a, b);
    for (double x : {-0.9, 0.1, 1.2}) {
      const double lhs = kernel_convolution_dx(mix, W, 0.0, x);
      const double rhs = a * kernel_convolution_dx(u, W, 0.0, x) +
                         b * kernel_convolution_dx(v, W, 0.0, x);
      REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
    }
  }
}

TEST_CASE("position outside the validity box is rejected", "[convolution]") {
  const auto W = presets::kernel("quadratic-kernel");  // box [-8, 8]
  const auto u = PiecewiseConstantFn::box(0.0, 1.0, 1.0);
  REQUIRE_NOTHROW(kernel_convolution_dx(u, W, 0.0, 5.0));
  REQUIRE_THROWS_AS(kernel_convolution_dx(u, W, 0.0, 10.0), std::domain_error);
}
