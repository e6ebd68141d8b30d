#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "schro/actions.hpp"
#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/regularizer.hpp"

using namespace schro;
using Catch::Approx;

namespace {

EuclideanBackend quadratic_1d() { return EuclideanBackend(Potential::quadratic({0.0}, 1.0)); }

Curve segment(const SpaceBackend& b, double a, double c, std::size_t n) {
  return geodesic_curve(b, Point(Coords{a}), Point(Coords{c}), n);
}

DensityBackend boltzmann_256() {
  return DensityBackend(Grid::over(-8.0, 10.0, 256, Boundary::no_flux), EntropyKind::boltzmann());
}

}  // namespace

TEST_CASE("building regularized curves", "[regularizer]") {
  const auto q = quadratic_1d();
  const Curve base = segment(q, 1.0, 2.0, 16);
  SECTION("zero smoothing time leaves the curve untouched") {
    const std::vector<double> zero(base.size(), 0.0);
    const RegularizedCurve r = build_regularized(q, base, zero);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(r.tilde[i] == base[i]);
  }
  SECTION("quadratic closed form and exact endpoints") {
    const RegularizedCurve r = build_regularized(q, base, HatFunction::recovery(0.3));
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double expect = std::exp(-oracle::h_eps(0.3, base.time(i))) * base[i].coords()[0];
      CHECK(r.tilde[i].coords()[0] == Approx(expect).epsilon(1e-15));
    }
    CHECK(r.tilde.front() == base.front());
    CHECK(r.tilde.back() == base.back());
    REQUIRE(r.hat.has_value());
  }
  SECTION("invalid smoothing times") {
    std::vector<double> bad(base.size(), 0.1);
    bad[3] = -0.1;
    CHECK_THROWS_AS(build_regularized(q, base, bad), Error);
    CHECK_THROWS_AS(build_regularized(q, base, std::vector<double>{0.0}), Error);
  }
  SECTION("Gaussian geodesic midpoint follows the heat law") {
    const auto b = boltzmann_256();
    const Grid& g = b.grid();
    const Curve c = geodesic_curve(b, Point(gaussian(g, 0.0, 1.0)), Point(gaussian(g, 2.0, 2.0)), 64);
    const double eps = 0.2;
    const RegularizedCurve r = build_regularized(b, c, HatFunction::recovery(eps));
    // midpoint is N(1, 1.5^2); smoothing adds 2 h(1/2) = eps to the variance
    const GridDensity expect = gaussian(g, 1.0, std::sqrt(2.25 + eps));
    CHECK(l1_distance(r.tilde[32].density(), expect) <= 1e-3);
    for (std::size_t i = 1; i + 1 < c.size(); ++i) CHECK(std::isfinite(r.tilde_slope[i]));
  }
}

TEST_CASE("discrete two-point estimate", "[regularizer]") {
  const auto q = quadratic_1d();
  SECTION("no smoothing is a trivial equality") {
    const Curve base = segment(q, 1.0, 2.0, 64);
    const RegularizedCurve r = build_regularized(q, base, std::vector<double>(base.size(), 0.0));
    const auto v = discrete_estimate_residual(q, r, 0, 64);
    REQUIRE(v.has_value());
    CHECK(std::abs(*v) <= 1e-14);
  }
  SECTION("quadratic closed form, all pairs") {
    const double eps = 0.1;
    const Curve base = segment(q, 1.0, 2.0, 64);
    const RegularizedCurve r = build_regularized(q, base, HatFunction::recovery(eps));
    double worst_oracle = -INFINITY;
    for (std::size_t i = 0; i < 64; ++i) {
      for (std::size_t j = i + 1; j <= 64; ++j) {
        const double o = oracle::quadratic_two_point(1.0, 2.0, eps, base.time(i), base.time(j));
        const auto v = discrete_estimate_residual(q, r, i, j);
        REQUIRE(v.has_value());
        CHECK(std::abs(*v - o) <= 1e-10 * std::max(1.0, std::abs(o)));
        worst_oracle = std::max(worst_oracle, o);
      }
    }
    CHECK(worst_oracle <= 1e-8);
    const PairSweep all = discrete_estimate_sweep(q, r);
    CHECK(all.pairs == 64 * 65 / 2);
    CHECK(all.worst <= 1e-8);
    const PairSweep adj = discrete_estimate_sweep(q, r, true);
    CHECK(adj.pairs == 64);
    CHECK(adj.worst <= 1e-8);
  }
  SECTION("node order is checked") {
    const Curve base = segment(q, 1.0, 2.0, 4);
    const RegularizedCurve r = build_regularized(q, base, HatFunction::recovery(0.1));
    CHECK_THROWS_AS(discrete_estimate_residual(q, r, 2, 1), Error);
    CHECK_THROWS_AS(discrete_estimate_residual(q, r, 0, 5), Error);
  }
  SECTION("Boltzmann Gaussian geodesic, all pairs") {
    const auto b = boltzmann_256();
    const Curve c = geodesic_curve(b, Point(gaussian(b.grid(), 0.0, 1.0)), Point(gaussian(b.grid(), 2.0, 1.0)), 64);
    const RegularizedCurve r = build_regularized(b, c, HatFunction::recovery(0.05));
    const PairSweep s = discrete_estimate_sweep(b, r);
    CHECK(s.pairs + s.skipped == 64 * 65 / 2);
    CHECK(s.worst <= 5e-3);
  }
}

TEST_CASE("pointwise differential estimate", "[regularizer]") {
  const auto q = quadratic_1d();
  SECTION("constant curve at the equilibrium") {
    const Curve c = Curve::uniform(std::vector<Point>(9, Point(Coords{0.0})));
    const RegularizedCurve r = build_regularized(q, c, HatFunction::recovery(0.4));
    for (std::size_t i = 1; i < 8; ++i) {
      if (i == 4) continue;
      CHECK(pointwise_estimate_residual(q, r, i) == 0.0);
    }
  }
  SECTION("quadratic closed form off the peak") {
    // central differences are second order; 1e-6 needs 128 intervals
    const Curve base = segment(q, 1.0, 2.0, 128);
    const RegularizedCurve r = build_regularized(q, base, HatFunction::recovery(0.1));
    for (std::size_t i = 1; i < 128; ++i) {
      if (i == 64) {
        try {
          (void)pointwise_estimate_residual(q, r, i);
          FAIL("peak node should be not applicable");
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::not_applicable);
        }
        continue;
      }
      CHECK(pointwise_estimate_residual(q, r, i) <= 1e-6);
    }
    CHECK_THROWS_AS(pointwise_estimate_residual(q, r, 0), Error);
  }
  SECTION("density geodesic near t = 0.3") {
    const auto b = boltzmann_256();
    const Curve c = geodesic_curve(b, Point(gaussian(b.grid(), 0.0, 1.0)), Point(gaussian(b.grid(), 2.0, 2.0)), 64);
    const RegularizedCurve r = build_regularized(b, c, HatFunction::recovery(0.1));
    const std::size_t i = 19;  // 19/64 = 0.297
    CHECK(pointwise_estimate_residual(b, r, i) <= 1e-2);
  }
}

TEST_CASE("recovery gap", "[regularizer]") {
  const auto q = quadratic_1d();
  const Curve base = segment(q, 1.0, 2.0, 64);
  CHECK(recovery_gap(q, base, 0.0) == 0.0);
  for (double eps : {0.2, 0.1, 0.05}) {
    CAPTURE(eps);
    const double oracle_gap = oracle::quadratic_recovery_gap(1.0, 2.0, eps, 64);
    const double gap = recovery_gap(q, base, eps);
    CHECK(gap == Approx(oracle_gap).epsilon(1e-12));
    CHECK(gap >= -5e-3);
  }
  // frozen after the oracle comparison
  CHECK(recovery_gap(q, base, 0.1) == Approx(0.0241872671644).epsilon(1e-10));

  CHECK_THROWS_AS(recovery_gap(q, segment(q, 1.0, 2.0, 5), 0.1), Error);
  CHECK_THROWS_AS(recovery_gap(q, base, -0.1), Error);

  const auto b = boltzmann_256();
  const Curve c = geodesic_curve(b, Point(gaussian(b.grid(), 0.0, 1.0)), Point(gaussian(b.grid(), 2.0, 1.0)), 64);
  for (double eps : {0.2, 0.1, 0.05}) CHECK(recovery_gap(b, c, eps) >= -5e-3);
}

TEST_CASE("convexity certificate", "[regularizer]") {
  const std::vector<double> thetas = unit_grid(33);
  REQUIRE(thetas.size() == 33);
  const auto q = quadratic_1d();
  CHECK(convexity_certificate(q, Point(Coords{1.0}), Point(Coords{-2.0}), std::vector<double>{0.0, 1.0}) == 0.0);
  CHECK(std::abs(convexity_certificate(q, Point(Coords{1.0}), Point(Coords{-2.0}), thetas)) <= 1e-9);
  const EuclideanBackend q2(Potential::quadratic({0.0, 0.0}, 1.0));
  CHECK(std::abs(convexity_certificate(q2, Point(Coords{1.0, 3.0}), Point(Coords{-2.0, 0.5}), thetas)) <= 1e-9);

  const Grid g = Grid::over(-8.0, 10.0, 256, Boundary::no_flux);
  for (const auto& kind : {EntropyKind::boltzmann(), EntropyKind::porous_medium(2.0)}) {
    const DensityBackend b(g, kind);
    CHECK(convexity_certificate(b, Point(gaussian(g, 0.0, 1.0)), Point(gaussian(g, 2.0, 2.0)), thetas) <= 1e-3);
  }
  CHECK_THROWS_AS(convexity_certificate(q, Point(Coords{1.0}), Point(Coords{2.0}), std::vector<double>{1.5}), Error);
}

TEST_CASE("regularized curves converge uniformly and keep entropy continuous", "[regularizer]") {
  const auto b = boltzmann_256();
  const Curve c = geodesic_curve(b, Point(gaussian(b.grid(), 0.0, 1.0)), Point(gaussian(b.grid(), 2.0, 2.0)), 32);
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05}) {
    const RegularizedCurve r = build_regularized(b, c, HatFunction::recovery(eps));
    double dist = 0.0, jump = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) dist = std::max(dist, b.distance(r.tilde[i], c[i]));
    for (std::size_t i = 1; i + 2 < c.size(); ++i)
      jump = std::max(jump, std::abs(r.tilde_entropy[i + 1] - r.tilde_entropy[i]));
    CHECK(dist < prev);
    CHECK(dist <= 2.0 * eps);
    CHECK(jump <= 2.0 / 32.0);
    prev = dist;
  }
}
