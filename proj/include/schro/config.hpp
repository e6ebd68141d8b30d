#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schro/analysis.hpp"
#include "schro/backend.hpp"
#include "schro/point.hpp"
#include "schro/solver.hpp"

namespace schro {

/// Names accepted by [run] properties, in report order.
const std::vector<std::string>& verify_property_names();

struct BackendConfig {
  enum class Kind { euclidean, density };
  Kind kind = Kind::euclidean;
  // euclidean: V(x) = strength/2 |x - center|^2
  Coords center{0.0};
  double strength = 1.0;
  // density
  std::string entropy = "boltzmann";
  double m = 2.0;
  double x_min = -8.0;
  double x_max = 10.0;
  std::size_t n = 256;
  Boundary boundary = Boundary::no_flux;
  double substep_factor = 0.5;
};

struct EndpointsConfig {
  // Coordinates "1, 0.5" or density presets: gaussian(mean, sigma),
  // mixture(w:mean:sigma, ...), near_dirac(x0), uniform, file(path).
  std::string x;
  std::string y;
  std::optional<MollifySchedule> mollify;
};

struct RunConfig {
  std::optional<std::string> command;
  double eps = 0.0;
  std::vector<double> eps_list{0.0};
  SolverOptions solver;
  bool chain = true;
  bool parallel = false;
  std::uint64_t seed = 0;
  // sweep checks
  bool taylor = true;
  bool derivative = true;
  bool gamma = true;
  double tol_taylor_rel = 0.05;
  double taylor_upper_slack = 1e-3;
  double tol_derivative_rel = 0.1;
  double tol_fisher_monotonicity = 1e-3;
  double tol_cost_monotonicity = 1e-6;
  double gamma_slack = 1e-8;
  // verify
  std::vector<std::string> properties;
  std::map<std::string, double> tolerances;
  std::vector<double> verify_times{0.05, 0.1, 0.2, 0.5};
  double ede_horizon = 0.1;
  std::vector<double> cert_eps{0.2, 0.1, 0.05};
  std::size_t cert_intervals = 64;
  std::size_t pointwise_intervals = 128;
  std::size_t samples = 4;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  bool csv = true;
  bool json = true;
};

struct ExperimentConfig {
  std::filesystem::path source;
  BackendConfig backend;
  EndpointsConfig endpoints;
  RunConfig run;
  OutputConfig output;
};

/// Strict INI parsing: unknown sections or keys, duplicates and invalid
/// values raise Config with "file:line: [section] key: reason".
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

std::unique_ptr<SpaceBackend> make_backend(const BackendConfig& config);

/// Resolves an endpoint description against the backend (files relative to `base_dir`).
Point make_endpoint(const std::string& spec, const SpaceBackend& backend, const BackendConfig& config,
                    const std::filesystem::path& base_dir);

/// Per-property default tolerances for the backend kind.
double default_tolerance(BackendConfig::Kind kind, const std::string& property);

}  // namespace schro
