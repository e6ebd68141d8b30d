#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "schro/backend.hpp"
#include "schro/curve.hpp"

namespace schro {

class DensityBackend;
class EuclideanBackend;

struct WarmStart {
  enum class Kind { regularized_geodesic, straight, user, state };

  Kind kind = Kind::regularized_geodesic;
  // Kind::user: a curve with n_time + 2 nodes joining the endpoints.
  std::optional<Curve> curve;
  // Kind::state: the native decision vector of a previous solve between the
  // same endpoints with the same n_time (see SchrodingerResult::state).
  std::vector<double> state;

  static WarmStart regularized_geodesic() { return {}; }
  static WarmStart straight() { return {Kind::straight, std::nullopt, {}}; }
  static WarmStart from_curve(Curve c) { return {Kind::user, std::move(c), {}}; }
  static WarmStart from_state(std::vector<double> z) { return {Kind::state, std::nullopt, std::move(z)}; }
};

struct SolverOptions {
  // Interior nodes; the time grid has n_time + 1 intervals.
  std::size_t n_time = 63;
  std::size_t max_iter = 2000;
  // Max-norm of the discrete gradient. Unset: 1e-7 (Euclidean), 1e-9 (density,
  // whose knot gradients carry level-mass weights of order 1/levels).
  std::optional<double> grad_tol;
  WarmStart warm_start;
  // Density backend: quantile levels per node (0 = twice the cell count).
  std::size_t levels = 0;
  std::size_t memory = 10;
  double armijo_c = 1e-4;
  double shrink = 0.5;

  /// Throws DomainError on n_time < 3, non-positive tolerances and the like.
  void validate() const;
};

struct SchrodingerResult {
  explicit SchrodingerResult(Curve curve, double eps_value = 0.0)
      : minimizer(std::move(curve)), eps(eps_value) {}

  Curve minimizer;
  double eps = 0.0;
  double cost = 0.0;
  double kinetic = 0.0;
  double fisher = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double stationarity = 0.0;
  // Objective after every accepted step (first entry: the warm start).
  std::vector<double> history;
  // Native decision vector: interior points (Euclidean) or interior
  // quantile knots (density). Feed back through WarmStart::from_state.
  std::vector<double> state;
};

/// Minimizes the discretized kinetic + eps^2 * Fisher action over curves on
/// the uniform grid with n_time interior nodes and endpoints x, y.
///
/// Density backend: the unknowns are quantile functions on a fixed graded
/// level grid; the kinetic part is the exact quantile chord sum and the
/// Fisher part is evaluated on the cells the quantile knots delimit. Only
/// no-flux grids are supported.
SchrodingerResult solve(const SpaceBackend& backend, const Point& x, const Point& y, double eps,
                        const SolverOptions& options = {});

/// Value of the solver's discretized action at `curve` (same grid as solve
/// with these options), without optimizing. Returns {cost, kinetic, fisher}
/// in a result whose minimizer is `curve`.
SchrodingerResult evaluate(const SpaceBackend& backend, const Curve& curve, double eps,
                           const SolverOptions& options = {});

struct GradientCheck {
  // max over samples of |analytic - finite difference| / max(|analytic|, |fd|, 1e-12)
  double max_rel_error = 0.0;
  std::size_t samples = 0;
};

/// Compares the solver's analytic gradient with fourth-order central
/// differences of its objective along random directions, at random
/// perturbations of the straight warm start.
GradientCheck check_gradient(const SpaceBackend& backend, const Point& x, const Point& y, double eps,
                             const SolverOptions& options, std::size_t samples, std::uint64_t seed);

/// 1/2 d(x,y)^2.
double geodesic_cost(const SpaceBackend& backend, const Point& x, const Point& y);

/// The flow curve t -> S_{eps t} x on the solver grid, with its action
/// evaluated by the core functionals.
SchrodingerResult bridge_from_flow(const SpaceBackend& backend, const Point& x, double eps,
                                   const SolverOptions& options = {});

}  // namespace schro
