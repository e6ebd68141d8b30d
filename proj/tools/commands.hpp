#pragma once

#include "schro/config.hpp"

namespace schro::cli {

enum ExitCode : int { ok = 0, usage = 1, failed = 2 };

int cmd_solve(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config);
int cmd_verify(const ExperimentConfig& config);

}  // namespace schro::cli
