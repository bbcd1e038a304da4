#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "clawlab/piecewise_constant.hpp"
#include "clawlab/weights.hpp"

using namespace clawlab;

namespace {

std::mt19937 rng(20240817u);

PiecewiseConstantFn randomStep(int maxCells = 8) {
  std::uniform_int_distribution<int> nc(1, maxCells);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  const int K = nc(rng);
  std::vector<double> b(K + 1);
  for (auto& x : b) x = pos(rng);
  std::sort(b.begin(), b.end());
  for (int k = 0; k < K; ++k)
    if (b[k + 1] - b[k] < 1e-3) b[k + 1] = b[k] + 1e-3;
  std::vector<double> v(K);
  for (auto& x : v) x = val(rng);
  return PiecewiseConstantFn(b, v);
}

}  // namespace

TEST_CASE("construction validates and merges slivers", "[core]") {
  REQUIRE_THROWS_AS(PiecewiseConstantFn({0.0, 0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(PiecewiseConstantFn({0.0, 1.0}, {}), std::invalid_argument);

  // sliver narrower than 1e-14 * diameter is absorbed
  const double tiny = 1e-16;
  PiecewiseConstantFn u({0.0, 0.5, 0.5 + tiny, 1.0}, {1.0, 7.0, 2.0});
  REQUIRE(u.cellCount() == 2);
  REQUIRE(u.mass() == Catch::Approx(0.5 * 1.0 + 0.5 * 2.0).margin(1e-12));
}

TEST_CASE("mass and total variation", "[core]") {
  const auto u = PiecewiseConstantFn::box(0.0, 1.0, 1.0);
  REQUIRE(u.mass() == 1.0);
  REQUIRE(u.totalVariation() == 2.0);  // up-jump plus down-jump

  PiecewiseConstantFn stairs({0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 1.0});
  REQUIRE(stairs.totalVariation() == 4.0);

  // three teeth of height 1/4: six jumps of 1/4
  std::vector<double> b, v;
  const double s = 0.25;
  for (int k = 0; k <= 2; ++k) {
    b.push_back(2 * k * s);
    v.push_back(s);
    b.push_back((2 * k + 1) * s);
    if (k < 2) v.push_back(0.0);
  }
  PiecewiseConstantFn beta(b, v);
  REQUIRE(beta.totalVariation() == Catch::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("l1 distance examples", "[core]") {
  const auto u = PiecewiseConstantFn::box(0.0, 1.0, 1.0);
  REQUIRE(l1_distance(u, u) == 0.0);

  const auto w = PiecewiseConstantFn::box(0.5, 1.5, 1.0);
  REQUIRE(l1_distance(u, w) == Catch::Approx(1.0).epsilon(1e-14));

  // hand integration on the merged 3-cell partition: |2-1| on [0,1], |0-1| on [1,2]
  const auto a = PiecewiseConstantFn::box(0.0, 1.0, 2.0);
  const auto c = PiecewiseConstantFn::box(0.0, 2.0, 1.0);
  REQUIRE(l1_distance(a, c) == Catch::Approx(2.0).epsilon(1e-14));

  // midpoint-quadrature oracle at h = 1e-4
  double quad = 0.0;
  const double h = 1e-4;
  for (double x = -0.5 + h / 2; x < 2.5; x += h) quad += std::abs(a(x) - c(x)) * h;
  REQUIRE(quad == Catch::Approx(2.0).margin(1e-3));

  // disjoint supports: distance is the sum of masses
  const auto d = PiecewiseConstantFn::box(5.0, 6.0, 3.0);
  REQUIRE(l1_distance(u, d) == Catch::Approx(u.mass() + d.mass()).epsilon(1e-14));
}

TEST_CASE("l1 distance is a metric on random triples", "[core]") {
  for (int it = 0; it < 1000; ++it) {
    const auto u = randomStep(), v = randomStep(), w = randomStep();
    const double duv = l1_distance(u, v);
    REQUIRE(duv >= 0.0);
    REQUIRE(duv == l1_distance(v, u));  // symmetric, bit for bit
    REQUIRE(l1_distance(u, u) == 0.0);
    REQUIRE(l1_distance(u, w) <= duv + l1_distance(v, w) + 1e-12);
  }
}

TEST_CASE("mass and TV invariant under refinement", "[core]") {
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  for (int it = 0; it < 200; ++it) {
    const auto u = randomStep();
    std::vector<double> extra(5);
    for (auto& x : extra) x = pos(rng);
    const auto r = refined(u, extra);
    REQUIRE(r.mass() == Catch::Approx(u.mass()).margin(1e-13));
    REQUIRE(r.totalVariation() == Catch::Approx(u.totalVariation()).margin(1e-13));
    REQUIRE(l1_distance(u, r) == Catch::Approx(0.0).margin(1e-13));
  }
}

TEST_CASE("weighted l1 distance", "[core]") {
  const auto u = PiecewiseConstantFn::box(0.0, 1.0, 1.0);
  const auto w = PiecewiseConstantFn::box(0.5, 1.5, 1.0);

  // Θ ≡ 1 on the supports reduces to the plain distance
  const auto one = make_weight([](double, double) { return 1.0; },
                               [](double, double) { return 0.0; }, nullptr, -10.0, 10.0);
  REQUIRE(weighted_l1_distance(u, w, one, 0.0) ==
          Catch::Approx(l1_distance(u, w)).epsilon(1e-12));
  REQUIRE(weighted_l1_distance(u, u, one, 0.0) == 0.0);

  // Θ(x) = x on [0,1]: exact antiderivative gives 1/2
  const auto ramp = make_weight([](double, double x) { return x; },
                                [](double, double) { return 1.0; }, nullptr, 0.0, 1.0);
  REQUIRE(weighted_l1_distance(u, PiecewiseConstantFn::zero(), ramp, 0.0) ==
          Catch::Approx(0.5).margin(1e-12));

  // weight without compact support metadata is rejected
  REQUIRE_THROWS_AS(make_weight([](double, double) { return 1.0; }, nullptr, nullptr, 0.0,
                                std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("csv round trip", "[core]") {
  PiecewiseConstantFn u({-1.0, 0.25, 2.0 / 3.0, 4.0}, {0.125, -3.0, 0.7});
  std::stringstream ss;
  writeCsv(ss, u);
  const auto back = readPiecewiseCsv(ss);
  REQUIRE(back.breakpoints() == u.breakpoints());
  REQUIRE(back.values() == u.values());

  std::stringstream again;
  writeCsv(again, back);
  // serialization is deterministic byte for byte
  std::stringstream first;
  writeCsv(first, u);
  REQUIRE(again.str() == first.str());
}

TEST_CASE("pointwise evaluation conventions", "[core]") {
  PiecewiseConstantFn u({0.0, 1.0, 2.0}, {3.0, 4.0});
  REQUIRE(u(-0.5) == 0.0);
  REQUIRE(u(0.0) == 3.0);   // right-continuous
  REQUIRE(u(1.0) == 4.0);
  REQUIRE(u(2.0) == 0.0);   // exterior
  REQUIRE(u(2.5) == 0.0);
}
