#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "schro/actions.hpp"
#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/regularizer.hpp"
#include "schro/solver.hpp"

using namespace schro;
using Catch::Approx;

namespace {

EuclideanBackend quadratic_1d() { return EuclideanBackend(Potential::quadratic({0.0}, 1.0)); }

DensityBackend boltzmann_256() {
  return DensityBackend(Grid::over(-8.0, 10.0, 256, Boundary::no_flux), EntropyKind::boltzmann());
}

void check_result_invariants(const SchrodingerResult& r, double tol) {
  CHECK(std::abs(r.cost - (r.kinetic + r.eps * r.eps * r.fisher)) <= 1e-12 * std::max(1.0, std::abs(r.cost)));
  if (r.converged) CHECK(r.stationarity <= tol);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  if (!r.history.empty()) CHECK(r.history.back() == Approx(r.cost).epsilon(1e-12));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("eps = 0 reproduces the segment", "[solver]") {
  const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
  const Point x(Coords{1.0, -1.0}), y(Coords{-2.0, 3.0});
  SolverOptions opts;
  opts.grad_tol = 1e-10;
  for (const WarmStart& w : {WarmStart::regularized_geodesic(), WarmStart::straight()}) {
    opts.warm_start = w;
    const SchrodingerResult r = solve(b, x, y, 0.0, opts);
    CHECK(r.converged);
    CHECK(r.stationarity <= 1e-10);
    CHECK(r.cost == Approx(12.5).epsilon(1e-12));
    for (std::size_t i = 0; i < r.minimizer.size(); ++i) {
      const double t = r.minimizer.time(i);
      CHECK(r.minimizer[i].coords()[0] == Approx(1.0 - 3.0 * t).margin(1e-10));
      CHECK(r.minimizer[i].coords()[1] == Approx(-1.0 + 4.0 * t).margin(1e-10));
    }
    check_result_invariants(r, 1e-10);
  }
}

TEST_CASE("gradient flow bridge identity", "[solver]") {
  const auto q = quadratic_1d();
  const double eps = std::log(2.0);
  const Point x(Coords{2.0});
  const Point y = q.flow(x, eps);
  REQUIRE(y.coords()[0] == Approx(1.0).epsilon(1e-15));
  const double expect = 1.5 * std::log(2.0);
  REQUIRE(oracle::quadratic_bridge_cost(2.0, 1.0, eps) == Approx(expect).epsilon(1e-12));
  const SchrodingerResult r = solve(q, x, y, eps);
  CHECK(r.converged);
  CHECK(std::abs(r.cost - expect) <= 1e-4);
  check_result_invariants(r, 1e-7);
  const SchrodingerResult f = bridge_from_flow(q, x, eps);
  CHECK(std::abs(f.cost - expect) <= 1e-4);
  // the minimizer is the flow curve itself
  for (std::size_t i = 0; i < r.minimizer.size(); ++i)
    CHECK(r.minimizer[i].coords()[0] == Approx(2.0 * std::exp(-eps * r.minimizer.time(i))).margin(1e-4));
}

TEST_CASE("bridge from an equilibrium is constant", "[solver]") {
  const auto q = quadratic_1d();
  const SchrodingerResult r = bridge_from_flow(q, Point(Coords{0.0}), 0.5);
  CHECK(r.cost == 0.0);
  for (const Point& p : r.minimizer.points()) CHECK(p.coords()[0] == 0.0);
  CHECK_THROWS_AS(bridge_from_flow(q, Point(Coords{0.0}), 0.0), Error);
}

TEST_CASE("Boltzmann bridge identity", "[solver][density]") {
  const auto b = boltzmann_256();
  const double eps = 0.1;
  const Point x(gaussian(b.grid(), 0.0, 1.0));
  const Point y = b.flow(x, eps);
  // E(N(0, s^2)) = -1/2 log(2 pi e s^2), variance 1 + 2 eps after the flow
  const double expect = eps * 0.5 * std::log(1.0 + 2.0 * eps);
  const double quad = eps * (oracle::normal_neg_entropy(1.0) - oracle::normal_neg_entropy(std::sqrt(1.0 + 2.0 * eps)));
  REQUIRE(quad == Approx(expect).epsilon(1e-8));
  const SchrodingerResult f = bridge_from_flow(b, x, eps);
  CHECK(std::abs(f.cost - expect) <= 0.02 * expect);
  const SchrodingerResult r = solve(b, x, y, eps);
  CHECK(r.converged);
  CHECK(std::abs(r.cost - expect) <= 0.02 * expect);
  check_result_invariants(r, 1e-9);
}

TEST_CASE("geodesic cost", "[solver]") {
  const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
  CHECK(geodesic_cost(b, Point(Coords{1.0, 1.0}), Point(Coords{1.0, 1.0})) == 0.0);
  CHECK(geodesic_cost(b, Point(Coords{0.0, 0.0}), Point(Coords{3.0, 4.0})) == Approx(12.5).epsilon(1e-15));
  const auto d = boltzmann_256();
  CHECK(std::abs(geodesic_cost(d, Point(gaussian(d.grid(), 0.0, 1.0)), Point(gaussian(d.grid(), 2.0, 1.0))) - 2.0) <= 1e-3);
}

TEST_CASE("Gaussian solve is bracketed by the geodesic and recovery costs", "[solver][density]") {
  const auto b = boltzmann_256();
  const Point x(gaussian(b.grid(), 0.0, 1.0)), y(gaussian(b.grid(), 2.0, 1.0));
  const double eps = 0.1;
  const SchrodingerResult r = solve(b, x, y, eps);
  REQUIRE(r.converged);
  const double cost0 = solve(b, x, y, 0.0).cost;
  CHECK(cost0 == Approx(2.0).margin(1e-3));
  CHECK(r.cost >= cost0);
  // recovery upper bound: the smoothed geodesic scored with the same discretization
  SolverOptions opts;
  const Curve geo = geodesic_curve(b, x, y, opts.n_time + 1);
  const Curve smoothed = build_regularized(b, geo, HatFunction::recovery(eps)).tilde;
  const double upper = evaluate(b, smoothed, eps).cost;
  CHECK(r.cost <= upper);
  // lower bound eps |E(x) - E(y)|; equal entropies here, so cost0 is the sharper bound
  CHECK(r.cost >= eps * std::abs(b.entropy(x) - b.entropy(y)) - 1e-9);
  check_result_invariants(r, 1e-9);
}

TEST_CASE("adjoint gradients match finite differences", "[solver]") {
  SECTION("Euclidean") {
    const EuclideanBackend b(Potential::quadratic({0.5, 0.0}, 1.5));
    SolverOptions opts;
    opts.n_time = 15;
    const GradientCheck g = check_gradient(b, Point(Coords{1.0, 2.0}), Point(Coords{-1.0, 0.5}), 0.7, opts, 20, 1);
    CHECK(g.samples == 20);
    CHECK(g.max_rel_error <= 1e-5);
  }
  SECTION("density, both entropies") {
    const Grid g = Grid::over(-6.0, 8.0, 96, Boundary::no_flux);
    for (const auto& kind : {EntropyKind::boltzmann(), EntropyKind::porous_medium(2.0)}) {
      CAPTURE(kind.name());
      const DensityBackend b(g, kind);
      SolverOptions opts;
      opts.n_time = 7;
      const GradientCheck c =
          check_gradient(b, Point(gaussian(g, 0.0, 1.0)), Point(gaussian(g, 2.0, 1.5)), 0.3, opts, 20, 2);
      CHECK(c.samples == 20);
      CHECK(c.max_rel_error <= 1e-5);
    }
  }
}

TEST_CASE("lower bound and grid consistency on the quadratic problem", "[solver]") {
  const auto q = quadratic_1d();
  const Point x(Coords{1.0}), y(Coords{2.0});
  for (double eps : {0.05, 0.2, 1.0}) {
    CAPTURE(eps);
    SolverOptions coarse;
    coarse.n_time = 31;
    SolverOptions fine;
    fine.n_time = 63;
    const SchrodingerResult a = solve(q, x, y, eps, coarse);
    const SchrodingerResult c = solve(q, x, y, eps, fine);
    CHECK(a.converged);
    CHECK(c.converged);
    CHECK(std::abs(a.cost - c.cost) <= 1e-3 * c.cost);
    CHECK(c.cost >= eps * std::abs(q.entropy(x) - q.entropy(y)) - 1e-9);
    // continuum oracle: x'' = eps^2 x
    CHECK(c.cost == Approx(oracle::quadratic_bridge_cost(1.0, 2.0, eps)).epsilon(1e-3));
    check_result_invariants(c, 1e-7);
  }
}

TEST_CASE("warm starts and evaluate", "[solver]") {
  const auto q = quadratic_1d();
  const Point x(Coords{1.0}), y(Coords{2.0});
  SolverOptions opts;
  const SchrodingerResult first = solve(q, x, y, 0.3, opts);
  opts.warm_start = WarmStart::from_state(first.state);
  const SchrodingerResult again = solve(q, x, y, 0.3, opts);
  CHECK(again.iterations <= 1);
  CHECK(again.cost == Approx(first.cost).epsilon(1e-12));

  opts.warm_start = WarmStart::from_curve(first.minimizer);
  CHECK(solve(q, x, y, 0.3, opts).cost == Approx(first.cost).epsilon(1e-12));

  const SchrodingerResult e = evaluate(q, first.minimizer, 0.3);
  CHECK(e.cost == Approx(first.cost).epsilon(1e-12));
  CHECK(schrodinger_action(q, first.minimizer, 0.3) == Approx(first.cost).epsilon(1e-12));

  opts.warm_start = WarmStart::from_state({1.0, 2.0});
  CHECK(code_of([&] { solve(q, x, y, 0.3, opts); }) == ErrorCode::domain_error);
  CHECK(code_of([&] { evaluate(q, geodesic_curve(q, x, y, 8), 0.3); }) == ErrorCode::domain_error);
}

TEST_CASE("non-convergence is reported, not thrown", "[solver]") {
  const auto q = quadratic_1d();
  SolverOptions opts;
  opts.max_iter = 1;
  opts.warm_start = WarmStart::straight();
  const SchrodingerResult r = solve(q, Point(Coords{1.0}), Point(Coords{2.0}), 2.0, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 1);
  check_result_invariants(r, 1e-7);
}

TEST_CASE("solver errors", "[solver]") {
  const auto q = quadratic_1d();
  const Point x(Coords{1.0}), y(Coords{2.0});
  CHECK(code_of([&] { solve(q, x, y, -0.1); }) == ErrorCode::domain_error);
  SolverOptions bad;
  bad.n_time = 2;
  CHECK(code_of([&] { solve(q, x, y, 0.1, bad); }) == ErrorCode::domain_error);
  bad = {};
  bad.grad_tol = 0.0;
  CHECK(code_of([&] { solve(q, x, y, 0.1, bad); }) == ErrorCode::domain_error);
  CHECK(code_of([&] { solve(q, x, Point(Coords{1.0, 2.0}), 0.1); }) == ErrorCode::invalid_curve);

  // V = +inf outside [-3, 3]
  const EuclideanBackend boxed(Potential::user(
      1, [](std::span<const double> v) { return std::abs(v[0]) > 3.0 ? INFINITY : 0.5 * v[0] * v[0]; },
      [](std::span<const double> v, std::span<double> g) { g[0] = v[0]; }, 1.0));
  CHECK(code_of([&] { solve(boxed, Point(Coords{4.0}), y, 0.1); }) == ErrorCode::endpoint_entropy_infinite);
  CHECK_NOTHROW(solve(boxed, Point(Coords{4.0}), y, 0.0));

  const Grid circle = Grid::over(0.0, 4.0, 64, Boundary::periodic);
  const DensityBackend periodic(circle, EntropyKind::boltzmann());
  CHECK(code_of([&] { solve(periodic, Point(gaussian(circle, 1.0, 0.5)), Point(gaussian(circle, 2.0, 0.5)), 0.1); }) ==
        ErrorCode::unsupported);
}
