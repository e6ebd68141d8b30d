#pragma once

#include "schro/backend.hpp"
#include "schro/curve.hpp"

namespace schro {

/// Half the discrete 2-energy, 1/2 sum d(g_i, g_{i+1})^2 / (t_{i+1} - t_i).
double kinetic_action(const SpaceBackend& backend, const Curve& curve);

struct FisherAction {
  double value = 0.0;
  // Set when an endpoint slope was +inf and its trapezoid weight was dropped.
  bool dropped_endpoint = false;
};

/// Trapezoid rule for 1/2 int |dE|^2(g_t) dt on the curve's own grid.
FisherAction fisher_action_detailed(const SpaceBackend& backend, const Curve& curve);

double fisher_action(const SpaceBackend& backend, const Curve& curve);

/// kinetic + eps^2 * fisher.
double schrodinger_action(const SpaceBackend& backend, const Curve& curve, double eps);

/// Throws InvalidCurve unless every point of `curve` belongs to `backend`.
void check_curve(const SpaceBackend& backend, const Curve& curve);

}  // namespace schro
