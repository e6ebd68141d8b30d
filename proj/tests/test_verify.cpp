#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <random>

#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/verify.hpp"

using namespace schro;
using Catch::Approx;

namespace {

const std::vector<double> kTimes{0.05, 0.1, 0.2, 0.5, 1.0};

EuclideanBackend quadratic_1d() { return EuclideanBackend(Potential::quadratic({0.0}, 1.0)); }

// 1D quadratic, lambda = 1: both sides of the EVI inequality at time s.
// d/ds 1/2 (x_s - y)^2 = -(x_s - y) x_s with x_s = e^{-s} x.
double evi_defect_closed_form(double x, double y, double s) {
  const double xs = std::exp(-s) * x;
  const double lhs = -(xs - y) * xs + 0.5 * (xs - y) * (xs - y) + 0.5 * xs * xs;
  return lhs - 0.5 * y * y;
}

}  // namespace

TEST_CASE("EVI defect on the quadratic potential", "[verify]") {
  const auto b = quadratic_1d();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const double x = z(rng), y = z(rng);
    for (double s : kTimes) CHECK(std::abs(evi_defect_closed_form(x, y, s)) <= 1e-12);
    const EviReport r = evi_defect(b, Point(Coords{x}), Point(Coords{y}), kTimes, 1e-6);
    CHECK(r.pass);
    CHECK(r.worst_residual <= 1e-6);
    CHECK(r.samples == kTimes.size());
    CHECK(r.property == "evi");
  }
}

TEST_CASE("EVI defect with y = x is pure dissipation", "[verify]") {
  const Grid g = Grid::over(-8.0, 8.0, 256, Boundary::no_flux);
  const DensityBackend b(g, EntropyKind::boltzmann());
  const Point x(gaussian_mixture(g, std::vector<double>{0.5, 0.5}, std::vector<double>{-1.5, 1.5},
                                 std::vector<double>{0.6, 0.6}));
  const std::vector<double> small{0.01, 0.02, 0.04};
  const EviReport r = evi_defect(b, x, x, small, 0.0);
  CHECK(r.worst_residual <= 0.0);
  CHECK(r.pass);
}

TEST_CASE("EVI defect along the heat flow", "[verify][density]") {
  const Grid g = Grid::over(-8.0, 8.0, 256, Boundary::no_flux);
  const DensityBackend b(g, EntropyKind::boltzmann());
  const Point x(gaussian_mixture(g, std::vector<double>{0.4, 0.6}, std::vector<double>{-2.0, 1.5},
                                 std::vector<double>{0.5, 0.8}));
  const Point y(gaussian(g, 0.0, 1.0));
  const EviReport r = evi_defect(b, x, y, std::vector<double>{0.05, 0.1, 0.2, 0.5}, 5e-3);
  CHECK(r.worst_residual <= 5e-3);
  CHECK(r.pass);
}

TEST_CASE("contraction", "[verify]") {
  SECTION("closed-form equality case") {
    const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
    const Point x(Coords{1.0, 0.0}), y(Coords{-1.0, 0.0});
    CHECK(b.distance(b.flow(x, 1.0), b.flow(y, 1.0)) == Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(2.0 * std::exp(-1.0) == Approx(0.735759).epsilon(1e-6));
    const std::vector<std::pair<Point, Point>> pairs{{x, y}, {x, x}};
    const EviReport r = contraction_report(b, pairs, std::vector<double>{1.0}, 1e-6);
    CHECK(std::abs(r.worst_residual) <= 1e-12);
    CHECK(r.pass);
    CHECK(r.samples == 2);
  }
  SECTION("translated Gaussians under the heat flow") {
    const Grid g = Grid::over(-10.0, 10.0, 256, Boundary::no_flux);
    const DensityBackend b(g, EntropyKind::boltzmann());
    const std::vector<std::pair<Point, Point>> pairs{
        {Point(gaussian(g, -1.0, 1.0)), Point(gaussian(g, 1.5, 1.0))},
        {Point(gaussian(g, 0.0, 0.7)), Point(gaussian(g, 0.0, 0.7))}};
    const EviReport r = contraction_report(b, pairs, std::vector<double>{0.1, 0.5, 1.0}, 2e-3);
    CHECK(r.worst_residual <= 2e-3);
    CHECK(r.pass);
  }
}

TEST_CASE("energy dissipation equality", "[verify]") {
  SECTION("equilibria") {
    const auto q = quadratic_1d();
    CHECK(ede_report(q, Point(Coords{0.0}), 1.0, 1e-12).worst_residual == 0.0);
    const Grid circle = Grid::over(0.0, 4.0, 64, Boundary::periodic);
    const DensityBackend b(circle, EntropyKind::boltzmann());
    CHECK(std::abs(ede_report(b, Point(uniform_density(circle)), 0.1, 1e-12).worst_residual) <= 1e-12);
  }
  SECTION("quadratic closed form") {
    // drop = 2 - 2e^{-2}; int_0^1 (2 e^{-s})^2 ds = 2 (1 - e^{-2})
    CHECK(2.0 - 2.0 * std::exp(-2.0) == Approx(2.0 * (1.0 - std::exp(-2.0))).epsilon(1e-15));
    const EviReport r = ede_report(quadratic_1d(), Point(Coords{2.0}), 1.0, 1e-6);
    CHECK(r.worst_residual <= 1e-6);
    CHECK(r.pass);
  }
  SECTION("heat flow from a standard Gaussian") {
    const Grid g = Grid::over(-10.0, 10.0, 256, Boundary::no_flux);
    const DensityBackend b(g, EntropyKind::boltzmann());
    // closed forms: E = -1/2 log(2 pi e sigma^2), slope^2 = 1/sigma^2 with sigma^2 = 1 + 2s,
    // so drop = 1/2 log(1.2) = int_0^0.1 ds / (1 + 2s)
    const double drop = 0.5 * std::log(1.2);
    const EviReport r = ede_report(b, Point(gaussian(g, 0.0, 1.0)), 0.1, 2e-2);
    CHECK(r.worst_residual <= 2e-2);
    CHECK(r.pass);
    const double measured = b.entropy(gaussian(g, 0.0, 1.0)) - b.entropy(b.flow(gaussian(g, 0.0, 1.0), 0.1));
    CHECK(measured == Approx(drop).epsilon(1e-2));
  }
}

TEST_CASE("regularization bound", "[verify]") {
  SECTION("quadratic, y = x") {
    const auto q = quadratic_1d();
    const double x = 1.7;
    for (double t : kTimes) {
      // slope(S_t x)^2 = e^{-2t} x^2 against x^2 / (2e^t - 1): (e^t - 1)^2 >= 0
      CHECK(std::exp(-2 * t) * x * x <= x * x / (2 * std::exp(t) - 1) + 1e-15);
    }
    const EviReport r = regularization_report(q, Point(Coords{x}), Point(Coords{x}), kTimes, 1e-6);
    CHECK(r.worst_residual <= 0.0);
    CHECK(r.pass);
  }
  SECTION("negative lambda skips late times") {
    // V = -x^2/2 has lambda = -1; -lambda t >= log 2 for t >= 0.693
    const EuclideanBackend b(Potential::user(
        1, [](std::span<const double> x) { return -0.5 * x[0] * x[0]; },
        [](std::span<const double> x, std::span<double> g) { g[0] = -x[0]; }, -1.0));
    const EviReport r = regularization_report(b, Point(Coords{0.5}), Point(Coords{0.2}),
                                              std::vector<double>{0.1, 0.5, 0.7, 1.0}, 1e-6);
    CHECK(r.skipped == 2);
    CHECK(r.samples == 2);
  }
  SECTION("peaked mixture against a smooth Gaussian") {
    const Grid g = Grid::over(-8.0, 8.0, 256, Boundary::no_flux);
    const DensityBackend b(g, EntropyKind::boltzmann());
    const Point x(gaussian_mixture(g, std::vector<double>{0.5, 0.5}, std::vector<double>{-1.0, 2.0},
                                   std::vector<double>{0.2, 0.3}));
    const Point y(gaussian(g, 0.0, 1.0));
    const EviReport r = regularization_report(b, x, y, std::vector<double>{0.05, 0.1, 0.2, 0.5}, 5e-3);
    CHECK(r.worst_residual <= 5e-3);
    CHECK(r.pass);
  }
}

TEST_CASE("slope monotonicity and the local-global representation", "[verify]") {
  const Grid g = Grid::over(-8.0, 8.0, 256, Boundary::no_flux);
  const DensityBackend b(g, EntropyKind::boltzmann());
  const Point x(gaussian_mixture(g, std::vector<double>{0.3, 0.7}, std::vector<double>{-2.0, 1.0},
                                 std::vector<double>{0.4, 0.9}));
  const std::vector<double> grid{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  CHECK(slope_monotonicity_report(b, x, grid, 1e-6).pass);

  const auto q = quadratic_1d();
  const EviReport rq = slope_monotonicity_report(q, Point(Coords{3.0}), grid, 1e-9);
  CHECK(rq.worst_residual <= 1e-9);

  std::vector<Point> samples{Point(Coords{0.0}), Point(Coords{2.5}), Point(Coords{-1.0})};
  const EviReport lg = local_global_report(q, Point(Coords{3.0}), samples, 1e-9);
  CHECK(lg.pass);
  CHECK(lg.worst_residual <= 1e-9);
}

TEST_CASE("residual sign convention", "[verify]") {
  // tolerance 0 fails as soon as the residual is positive, and never otherwise
  const auto q = quadratic_1d();
  const EviReport r = ede_report(q, Point(Coords{2.0}), 1.0, 0.0);
  CHECK(r.pass == (r.worst_residual <= 0.0));
  CHECK(r.tolerance == 0.0);
}

TEST_CASE("density suite runtime", "[verify][density]") {
  const auto start = std::chrono::steady_clock::now();
  const Grid g = Grid::over(-8.0, 8.0, 256, Boundary::no_flux);
  const DensityBackend b(g, EntropyKind::boltzmann());
  const Point x(gaussian(g, -0.5, 0.8));
  const Point y(gaussian(g, 1.0, 1.2));
  const std::vector<std::pair<Point, Point>> pairs{{x, y}};
  const std::vector<double> grid{0.05, 0.1, 0.2};
  CHECK(contraction_report(b, pairs, grid, 2e-3).pass);
  CHECK(ede_report(b, x, 0.1, 2e-2).pass);
  CHECK(slope_monotonicity_report(b, x, grid, 1e-6).pass);
  CHECK(regularization_report(b, x, y, grid, 5e-3).pass);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds <= 30.0);
}
