#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "schro/backend.hpp"

namespace schro {

/// Outcome of one numerical certificate. Residuals are sign-normalized so
/// that pass <=> worst_residual <= tolerance.
struct EviReport {
  std::string property;
  double worst_residual = 0.0;
  std::size_t samples = 0;
  // Samples outside the statement's domain (e.g. -lambda t >= log 2).
  std::size_t skipped = 0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Worst defect of 1/2 d/ds d^2(S_s x, y) + lambda/2 d^2(S_s x, y) + E(S_s x) - E(y)
/// over s_grid, the derivative by central differences with step min(1e-3, s/10).
EviReport evi_defect(const SpaceBackend& backend, const Point& x, const Point& y,
                     std::span<const double> s_grid, double tolerance);

/// max d(S_s a, S_s b) - e^{-lambda s} d(a, b) over pairs and s.
EviReport contraction_report(const SpaceBackend& backend,
                             std::span<const std::pair<Point, Point>> pairs,
                             std::span<const double> s_grid, double tolerance);

/// |E(x) - E(S_T x) - int_0^T |dE|^2(S_s x) ds| / max(1, |E(x) - E(S_T x)|),
/// the integral by composite Simpson on `intervals` (even) steps.
EviReport ede_report(const SpaceBackend& backend, const Point& x, double T, double tolerance,
                     std::size_t intervals = 200);

/// max |dE|^2(S_t x) - |dE|^2(y) / (2e^{lambda t} - 1) - d^2(x,y) / I_lambda(t)^2,
/// I_lambda(t) = int_0^t e^{lambda s} ds. Times with -lambda t >= log 2 are skipped.
EviReport regularization_report(const SpaceBackend& backend, const Point& x, const Point& y,
                                std::span<const double> t_grid, double tolerance);

/// max over consecutive grid times of e^{lambda s'} |dE|(S_s' x) - e^{lambda s} |dE|(S_s x).
EviReport slope_monotonicity_report(const SpaceBackend& backend, const Point& x,
                                    std::span<const double> s_grid, double tolerance);

/// max over samples y of ((E(x) - E(y)) / d(x,y) + lambda/2 d(x,y))^+ - |dE|(x).
/// The global representation says this is <= 0 with the sup attained as y -> x
/// along the flow, so callers should include such samples.
EviReport local_global_report(const SpaceBackend& backend, const Point& x,
                              std::span<const Point> samples, double tolerance);

}  // namespace schro
