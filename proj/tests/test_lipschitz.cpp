#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clawlab/lipschitz.hpp"

using namespace clawlab;

TEST_CASE("lipschitz estimate on simple fields", "[lipschitz]") {
  LipBox box{0.0, 1.0, 0.0, 1.0};

  const auto ident = estimate_lip([](double, double u) { return u; }, LipAxis::density, box);
  REQUIRE(ident.value == Catch::Approx(1.0).epsilon(1e-12));

  const auto cons = estimate_lip([](double, double) { return 3.0; }, LipAxis::space, box);
  REQUIRE(cons.value == 0.0);

  LipBox sbox{0.0, M_PI, 0.0, 0.0};
  const auto sine =
      estimate_lip([](double x, double) { return std::sin(x); }, LipAxis::space, sbox, 10000);
  REQUIRE(sine.value == Catch::Approx(1.0).margin(1e-4));
  REQUIRE(sine.sampleCount == 10000);
}

TEST_CASE("monotone under nested refinement, bounded by the true constant", "[lipschitz]") {
  LipBox box{0.0, 2.0, 0.0, 1.0};
  auto f = [](double x, double u) { return std::sin(3.0 * x) * (1.0 + u * u); };
  double prev = 0.0;
  for (int g = 16; g <= 1024; g *= 2) {
    const auto est = estimate_lip(f, LipAxis::space, box, g);
    REQUIRE(est.value >= prev - 1e-15);
    REQUIRE(est.value <= 3.0 * 2.0 + 1e-12);  // |∂x f| <= 3 (1+u^2) <= 6
    prev = est.value;
  }
}

TEST_CASE("degenerate box reports zero with a flag", "[lipschitz]") {
  LipBox flat{0.5, 0.5, 0.0, 1.0};
  const auto est = estimate_lip([](double x, double) { return x; }, LipAxis::space, flat);
  REQUIRE(est.degenerate);
  REQUIRE(est.value == 0.0);
  REQUIRE_THROWS_AS(
      estimate_lip([](double, double) { return 0.0; }, LipAxis::space, flat, 1),
      std::invalid_argument);
}
