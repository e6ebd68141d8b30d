#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/io.hpp"

using namespace schro;

namespace {

ErrorCode code_of(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no schro::Error thrown");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("format_double and parse_double round trip", "[io]") {
  const double values[] = {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23,
                           std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(),
                           std::numeric_limits<double>::lowest()};
  for (double v : values) {
    const double back = parse_double(format_double(v));
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::isinf(parse_double("inf")));
  CHECK(parse_double("-inf") < 0.0);
  CHECK(std::isnan(parse_double("nan")));

  for (const char* bad : {"", "abc", "1.0x", " 1", "1 ", "--1", "Infinity", "NAN", "infinity"})
    CHECK(code_of([&] { parse_double(bad); }) == ErrorCode::io);
}

TEST_CASE("curve CSV round trip is exact", "[io]") {
  SECTION("coordinates") {
    const EuclideanBackend b(Potential::quadratic({0.0, 0.0}, 1.0));
    const Curve c({0.0, 1.0 / 3.0, 1.0},
                  {Point(Coords{0.1, -1e-17}), Point(Coords{1.0 / 7.0, 2.0}), Point(Coords{3.0, 4.0})});
    std::stringstream ss;
    write_curve_csv(ss, c);
    CHECK(ss.str().rfind("t,x0,x1\n", 0) == 0);
    const Curve back = read_curve_csv(ss, b);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(back.time(i) == c.time(i));
      CHECK(back[i].coords() == c[i].coords());
    }
  }
  SECTION("densities") {
    const Grid g = Grid::over(-4.0, 4.0, 32, Boundary::no_flux);
    const DensityBackend b(g, EntropyKind::boltzmann());
    const Curve c = Curve::uniform({Point(gaussian(g, -1.0, 0.7)), Point(gaussian(g, 0.0, 1.0)),
                                    Point(gaussian(g, 1.0, 0.5))});
    std::stringstream ss;
    write_curve_csv(ss, c);
    CHECK(ss.str().rfind("t,rho0,", 0) == 0);
    const Curve back = read_curve_csv(ss, b);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < g.n; ++j) CHECK(back[i].density()[j] == c[i].density()[j]);
  }
  SECTION("malformed input") {
    const EuclideanBackend b(Potential::quadratic({0.0}, 1.0));
    std::stringstream empty;
    CHECK(code_of([&] { read_curve_csv(empty, b); }) == ErrorCode::io);
    std::stringstream ragged("t,x0\n0,1\n1,2,3\n");
    CHECK(code_of([&] { read_curve_csv(ragged, b); }) == ErrorCode::io);
    std::stringstream single("t,x0\n0,1\n");
    CHECK(code_of([&] { read_curve_csv(single, b); }) == ErrorCode::io);
    std::stringstream density("t,rho0\n0,1\n1,1\n");
    CHECK(code_of([&] { read_curve_csv(density, b); }) == ErrorCode::io);
  }
}

TEST_CASE("density CSV round trip", "[io]") {
  const Grid g = Grid::over(-6.0, 6.0, 48, Boundary::no_flux);
  const GridDensity rho = gaussian(g, 0.5, 1.2);
  std::stringstream ss;
  write_density_csv(ss, rho);
  const std::string text = ss.str();
  const GridDensity back = read_density_csv(ss, g);
  for (std::size_t i = 0; i < g.n; ++i) CHECK(back[i] == rho[i]);

  // unnormalized input is rescaled to unit mass
  std::stringstream twice;
  twice << "x,rho\n";
  for (std::size_t i = 0; i < g.n; ++i) twice << format_double(g.center(i)) << ',' << format_double(2.0 * rho[i]) << '\n';
  const GridDensity scaled = read_density_csv(twice, g);
  for (std::size_t i = 0; i < g.n; ++i) CHECK(scaled[i] == Catch::Approx(rho[i]).epsilon(1e-14));

  const Grid shifted = Grid::over(-5.0, 7.0, 48, Boundary::no_flux);
  std::stringstream again(text);
  CHECK(code_of([&] { read_density_csv(again, shifted); }) == ErrorCode::grid_mismatch);
  const Grid finer = Grid::over(-6.0, 6.0, 96, Boundary::no_flux);
  std::stringstream third(text);
  CHECK(code_of([&] { read_density_csv(third, finer); }) == ErrorCode::grid_mismatch);
  std::stringstream header("x,density\n");
  CHECK(code_of([&] { read_density_csv(header, g); }) == ErrorCode::io);
}

TEST_CASE("profile CSV round trip", "[io]") {
  CostProfile p;
  const auto row = [](double eps, double cost, double kinetic, double fisher, bool converged) {
    ProfileRow r;
    r.eps = eps;
    r.cost = cost;
    r.kinetic = kinetic;
    r.fisher = fisher;
    r.converged = converged;
    return r;
  };
  p.rows.push_back(row(0.0, 0.5, 0.5, 1.25, true));
  p.rows.push_back(row(0.1, 0.5 + 1.0 / 3.0, 0.51, 1.2, false));
  std::stringstream ss;
  write_profile_csv(ss, p);
  CHECK(ss.str() ==
        "eps,cost,kinetic,fisher,converged\n0,0.5,0.5,1.25,1\n0.10000000000000001,0.83333333333333326,"
        "0.51000000000000001,1.2,0\n");
  const auto rows = read_profile_csv(ss);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(rows[i].eps == p.rows[i].eps);
    CHECK(rows[i].cost == p.rows[i].cost);
    CHECK(rows[i].kinetic == p.rows[i].kinetic);
    CHECK(rows[i].fisher == p.rows[i].fisher);
    CHECK(rows[i].converged == p.rows[i].converged);
  }
  std::stringstream bad("eps,cost,kinetic,fisher,converged\n0,1,1,1,2\n");
  CHECK(code_of([&] { read_profile_csv(bad); }) == ErrorCode::io);
}

TEST_CASE("dump_json", "[io]") {
  nlohmann::ordered_json j;
  j["zeta"] = 0.1;
  j["alpha"] = {1, 2.5, std::numeric_limits<double>::infinity()};
  j["nan"] = std::nan("");
  j["empty"] = nlohmann::ordered_json::object();
  j["flag"] = true;
  const std::string text = dump_json(j);
  CHECK(text ==
        "{\n  \"zeta\": 0.10000000000000001,\n  \"alpha\": [\n    1,\n    2.5,\n    \"inf\"\n  ],\n"
        "  \"nan\": \"nan\",\n  \"empty\": {},\n  \"flag\": true\n}\n");
  CHECK(dump_json(j) == text);
  CHECK(dump_json(j, -1) == "{\"zeta\":0.10000000000000001,\"alpha\":[1,2.5,\"inf\"],\"nan\":\"nan\",\"empty\":{},\"flag\":true}\n");
  // finite floats survive a parse
  const auto back = nlohmann::ordered_json::parse(text);
  CHECK(back["zeta"].get<double>() == 0.1);

  EviReport r;
  r.property = "evi";
  r.worst_residual = -1e-3;
  r.samples = 3;
  r.tolerance = 1e-6;
  r.pass = true;
  const auto rj = to_json(r);
  CHECK(rj["property"] == "evi");
  CHECK(rj["samples"] == 3);
  CHECK(rj["pass"] == true);
}

TEST_CASE("text files", "[io]") {
  const auto dir = std::filesystem::temp_directory_path() / "schro_test_io";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "a.txt";
  write_text_file(path, "line one\nline two\n");
  CHECK(read_text_file(path) == "line one\nline two\n");
  CHECK(code_of([&] { read_text_file(dir / "missing.txt"); }) == ErrorCode::io);
  std::filesystem::remove_all(dir);
}
