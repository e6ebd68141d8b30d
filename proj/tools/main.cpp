#include <cstdio>
#include <string>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "schro/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Metric Schroedinger problem: solves, eps sweeps and flow certificates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "minimize the entropic action at [run] eps"},
      {"sweep", "solve over [run] eps_list and run the profile checks"},
      {"verify", "evaluate the flow and regularization certificates"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (INI)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "sample seed (overrides [run] seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : schro::cli::usage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    schro::ExperimentConfig config = schro::load_config(config_path);
    if (config.run.command && *config.run.command != command)
      schro::fail(schro::ErrorCode::config,
                  fmt::format("{}: [run] command: config is for '{}', invoked as '{}'", config_path,
                              *config.run.command, command));
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (app.get_subcommands().front()->count("--seed")) config.run.seed = seed;
    if (command == "solve") return schro::cli::cmd_solve(config);
    if (command == "sweep") return schro::cli::cmd_sweep(config);
    return schro::cli::cmd_verify(config);
  } catch (const schro::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    // Numerical contract violations inside a run count as failed runs.
    switch (e.code()) {
      case schro::ErrorCode::config:
      case schro::ErrorCode::io:
      case schro::ErrorCode::profile_incomplete:
      case schro::ErrorCode::domain_error:
      case schro::ErrorCode::grid_mismatch:
      case schro::ErrorCode::unsupported:
      case schro::ErrorCode::endpoint_entropy_infinite:
      case schro::ErrorCode::schedule_rejected:
        return schro::cli::usage;
      default:
        return schro::cli::failed;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return schro::cli::usage;
  }
}
