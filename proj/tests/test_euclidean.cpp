#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"

using namespace schro;
using Catch::Approx;

namespace {

// V = x^4/4 + x^2/2 on R (lambda = 1)
Potential quartic() {
  return Potential::user(
      1, [](std::span<const double> x) { return 0.25 * std::pow(x[0], 4) + 0.5 * x[0] * x[0]; },
      [](std::span<const double> x, std::span<double> g) { g[0] = x[0] * x[0] * x[0] + x[0]; }, 1.0);
}

// x' = -(x^3 + x) integrates to x^2/(1+x^2) = e^{-2s} x0^2/(1+x0^2).
double quartic_flow(double x0, double s) {
  const double k = std::exp(-2.0 * s) * x0 * x0 / (1.0 + x0 * x0);
  return std::copysign(std::sqrt(k / (1.0 - k)), x0);
}

double x0(const Point& p) { return p.coords()[0]; }

}  // namespace

TEST_CASE("quadratic flow is the closed-form contraction", "[euclidean]") {
  const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
  const Point x(Coords{1.0, 0.0});
  const Point f = b.flow(x, std::log(2.0));
  CHECK(f.coords()[0] == Approx(0.5).epsilon(1e-15));
  CHECK(f.coords()[1] == 0.0);
  CHECK(b.flow(x, 0.0) == x);
  CHECK_THROWS_AS(b.flow(x, -1.0), Error);

  const EuclideanBackend shifted(Potential::quadratic({1.0, -1.0}, 2.0));
  const Point g = shifted.flow(Point(Coords{3.0, 0.0}), 0.25);
  CHECK(g.coords()[0] == Approx(1.0 + 2.0 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(g.coords()[1] == Approx(-1.0 + std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("user potential flow against the closed-form quartic solution", "[euclidean]") {
  const EuclideanBackend b(quartic());
  const Point x(Coords{1.0});
  const double expect = quartic_flow(1.0, 0.5);
  CHECK(std::abs(x0(b.flow(x, 0.5)) - expect) <= 1e-9 * std::abs(expect));
  for (double s : {0.01, 0.3, 1.0, 2.0})
    CHECK(std::abs(x0(b.flow(Point(Coords{-1.7}), s)) - quartic_flow(-1.7, s)) <= 1e-9 * std::abs(quartic_flow(-1.7, s)));
  CHECK(b.flow(x, 0.0) == x);
  // regression value, frozen after matching the closed form
  CHECK(x0(b.flow(x, 0.5)) == Approx(0.474762755027).epsilon(1e-9));
}

TEST_CASE("user flow divergence is reported", "[euclidean]") {
  // V = -x^4/4 is not convex; its gradient flow blows up in finite time
  const EuclideanBackend b(Potential::user(
      1, [](std::span<const double> x) { return -0.25 * std::pow(x[0], 4); },
      [](std::span<const double> x, std::span<double> g) { g[0] = -x[0] * x[0] * x[0]; }, 0.0));
  try {
    (void)b.flow(Point(Coords{2.0}), 5.0);
    FAIL("expected FlowDiverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::flow_diverged);
  }
}

TEST_CASE("slope", "[euclidean]") {
  const EuclideanBackend q(Potential::quadratic({0.0, 0.0}, 1.0));
  CHECK(q.slope(Point(Coords{3.0, 4.0})) == Approx(5.0).epsilon(1e-15));
  CHECK(q.slope(Point(Coords{0.0, 0.0})) == 0.0);
  const EuclideanBackend b(quartic());
  CHECK(b.slope(Point(Coords{1.0})) == Approx(2.0).epsilon(1e-15));
  // finite-difference cross-check of the hand derivative
  const double h = 1e-5;
  const auto& V = b.potential();
  const double fd = (V.value(std::vector<double>{1.0 + h}) - V.value(std::vector<double>{1.0 - h})) / (2 * h);
  CHECK(fd == Approx(2.0).epsilon(1e-8));
  CHECK(b.slope(Point(Coords{0.0})) == 0.0);
}

TEST_CASE("geodesics are constant-speed segments", "[euclidean]") {
  const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
  const Point x(Coords{0.0, 0.0});
  const Point y(Coords{2.0, 0.0});
  CHECK(b.geodesic(x, y, 0.0) == x);
  CHECK(b.geodesic(x, y, 1.0) == y);
  CHECK(b.geodesic(x, y, 0.5).coords() == Coords{1.0, 0.0});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Point a(Coords{z(rng), z(rng)}), c(Coords{z(rng), z(rng)});
    const double th = u(rng);
    CHECK(std::abs(b.distance(b.geodesic(a, c, th), a) - th * b.distance(a, c)) <= 1e-12);
  }
}

TEST_CASE("global slope representation", "[euclidean]") {
  const EuclideanBackend b(Potential::quadratic({0.0}, 1.0));
  const Point x(Coords{2.0});
  // at the minimizer every term is non-positive
  const std::vector<Point> around{Point(Coords{1.0}), Point(Coords{-3.0}), Point(Coords{0.5})};
  CHECK(b.slope_global_check(Point(Coords{0.0}), around) == 0.0);
  // saturated at y = x0: (2 - 0)/2 + 1/2 * 2
  const std::vector<Point> center{Point(Coords{0.0})};
  CHECK(b.slope_global_check(x, center) == Approx(2.0).epsilon(1e-15));
  // with lambda = 1 every y = 2 - h saturates: (2h - h^2/2)/h + h/2 = 2
  for (double h : {1.0, 0.1, 0.01, 0.001}) {
    const std::vector<Point> s{Point(Coords{2.0 - h})};
    CHECK(b.slope_global_check(x, s) == Approx(2.0).epsilon(1e-12));
  }

  // the quartic is strictly more convex than lambda = 1, so the quotients
  // approach |V'(1)| = 2 from below
  const EuclideanBackend qb(quartic());
  double prev = 0.0;
  for (double h : {1.0, 0.1, 0.01, 0.001}) {
    const std::vector<Point> s{Point(Coords{1.0 - h})};
    const double v = qb.slope_global_check(Point(Coords{1.0}), s);
    CHECK(v <= 2.0 + 1e-9);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev == Approx(2.0).margin(1e-2));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<Point> samples;
  for (int i = 0; i < 40; ++i) samples.emplace_back(Coords{1.3 + z(rng)});
  CHECK(qb.slope_global_check(Point(Coords{1.3}), samples) <= qb.slope(Point(Coords{1.3})) + 1e-9);
}

TEST_CASE("flow invariants on random samples", "[euclidean]") {
  const EuclideanBackend q(Potential::quadratic({0.5, -1.0}, 1.0));
  const EuclideanBackend u(quartic());
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> s(0.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Point a(Coords{z(rng), z(rng)}), c(Coords{z(rng), z(rng)});
    const double t = s(rng), t2 = s(rng);
    CHECK(q.distance(q.flow(a, t), q.flow(c, t)) <= std::exp(-t) * q.distance(a, c) + 1e-8);
    CHECK(q.distance(q.flow(q.flow(a, t), t2), q.flow(a, t + t2)) <= 1e-8);
    const Point a1(Coords{z(rng)}), c1(Coords{z(rng)});
    CHECK(u.distance(u.flow(a1, t), u.flow(c1, t)) <= std::exp(-t) * u.distance(a1, c1) + 1e-8);
    CHECK(u.distance(u.flow(u.flow(a1, t), t2), u.flow(a1, t + t2)) <= 1e-8);
  }
}

TEST_CASE("energy dissipation along the quadratic flow", "[euclidean]") {
  const EuclideanBackend q(Potential::quadratic({0.0}, 1.0));
  const Point x(Coords{2.0});
  const double T = 1.0;
  const double drop = q.entropy(x) - q.entropy(q.flow(x, T));
  // trapezoid rule on the slope squared, as the property is stated
  const std::size_t n = 2000;
  double integral = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s0 = T * k / n, s1 = T * (k + 1) / n;
    const double f0 = std::pow(q.slope(q.flow(x, s0)), 2), f1 = std::pow(q.slope(q.flow(x, s1)), 2);
    integral += 0.5 * (f0 + f1) * (s1 - s0);
  }
  CHECK(drop == Approx(2.0 - 2.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(std::abs(drop - integral) <= 1e-4 * drop);

  // s -> e^{lambda s} |dV|(S_s x) is non-increasing
  double prev = INFINITY;
  for (int k = 0; k <= 40; ++k) {
    const double s = 0.05 * k;
    const double v = std::exp(s) * q.slope(q.flow(x, s));
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("potential diagnostics", "[euclidean]") {
  std::vector<Coords> samples{{-1.0}, {0.3}, {2.0}, {-2.5}};
  const auto ok = diagnose(quartic(), samples);
  CHECK(ok.gradient_rel_error <= 1e-4);
  CHECK(ok.min_hessian_quotient >= 1.0 - 1e-9);
  CHECK(ok.warnings.empty());

  // wrong gradient and an overstated lambda: warnings, not errors
  const Potential bad = Potential::user(
      1, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; },
      [](std::span<const double> x, std::span<double> g) { g[0] = 1.1 * x[0]; }, 5.0);
  const auto d = diagnose(bad, samples);
  CHECK(d.gradient_rel_error > 1e-4);
  CHECK_FALSE(d.warnings.empty());
}
