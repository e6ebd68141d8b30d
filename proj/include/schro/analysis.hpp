#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "schro/backend.hpp"
#include "schro/curve.hpp"
#include "schro/solver.hpp"

namespace schro {

struct ProfileRow {
  double eps = 0.0;
  double cost = 0.0;
  double kinetic = 0.0;
  double fisher = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double stationarity = 0.0;
  // Whether the objective never increased along the solve.
  bool monotone_descent = true;
  std::shared_ptr<const Curve> minimizer;
};

/// The entropic cost as a function of eps, rows strictly increasing in eps.
struct CostProfile {
  std::vector<ProfileRow> rows;
  // 1/2 d(x,y)^2
  double geodesic_cost = 0.0;

  /// Throws DomainError unless rows are strictly increasing with eps >= 0.
  void validate() const;
  const ProfileRow* find(double eps) const;
};

struct SweepOptions {
  SolverOptions solver;
  // Warm-start each eps from the next larger one's state (descending order).
  bool chain = true;
  // Solve the eps values concurrently; only honoured when chain is off.
  bool parallel = false;
};

/// Solves for every eps. Throws EndpointEntropyInfinite (pointing at
/// mollified_sweep) when an endpoint has infinite entropy and some eps > 0.
CostProfile sweep(const SpaceBackend& backend, const Point& x, const Point& y,
                  std::span<const double> eps_list, const SweepOptions& options = {});

/// max over consecutive converged rows of fisher(eps2) - fisher(eps1), eps1 < eps2.
double fisher_monotonicity(const CostProfile& profile);

/// max over consecutive converged rows of cost(eps1) - cost(eps2), eps1 < eps2.
double cost_monotonicity(const CostProfile& profile);

struct DerivativeResidual {
  double eps = 0.0;
  double quotient = 0.0;   // (cost(eps+) - cost(eps-)) / (eps+ - eps-)
  double predicted = 0.0;  // 2 eps fisher(eps)
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / max(|predicted|, 1e-300); 0 when both vanish
};

/// One entry per interior row.
std::vector<DerivativeResidual> derivative_check(const CostProfile& profile);

struct TaylorReport {
  struct Entry {
    double eps = 0.0;
    double ratio = 0.0;  // (cost_eps - cost_0) / eps^2
    double upper_excess = 0.0;  // cost_eps - cost_0 - eps^2 I_0
  };
  std::vector<Entry> entries;  // increasing eps, eps > 0 only
  double fisher0 = 0.0;
  double limit_estimate = 0.0;  // ratio at the smallest eps
  double rel_error_at_smallest = 0.0;
  bool approaches_monotonically = false;
  double worst_upper_excess = 0.0;
  bool pass = false;
};

/// Needs an eps = 0 row (ProfileIncomplete otherwise); I_0 is that row's
/// Fisher action. Pass: within `rel_tol` at the smallest eps, |ratio - I_0|
/// decreasing as eps decreases, and cost_eps - cost_0 <= eps^2 I_0 + upper_slack.
TaylorReport taylor_check(const CostProfile& profile, double rel_tol = 0.05,
                          double upper_slack = 1e-3);

struct GammaReport {
  struct Entry {
    double eps = 0.0;
    double excess = 0.0;        // cost_eps - cost_0
    double rate = 0.0;          // log-log slope of excess against the next smaller eps (0 for the last)
    double distance = 0.0;      // max_t d(omega^eps_t, omega^0_t)
    double recovery_excess = 0.0;  // A_eps(recovery curve) - cost_eps
  };
  std::vector<Entry> entries;  // decreasing eps, eps > 0 only
  bool excess_positive_decreasing = false;
  bool distance_decreasing = false;
  bool recovery_nonnegative = false;
  bool recovery_decreasing = false;
  bool pass = false;
};

/// Gamma-convergence diagnostics from a profile with an eps = 0 row; the
/// recovery curves regularize the eps = 0 minimizer and are scored with the
/// solver's discretization.
GammaReport gamma_diagnostics(const SpaceBackend& backend, const CostProfile& profile,
                              const SolverOptions& options, double slack = 1e-8);

/// eta(eps) = scale * eps^exponent; exponent 0 with scale 0 disables mollification.
struct MollifySchedule {
  double exponent = 0.5;
  double scale = 1.0;

  static MollifySchedule none() { return {0.0, 0.0}; }
  static MollifySchedule power(double exponent, double scale = 1.0) { return {exponent, scale}; }
  double eta(double eps) const;
  std::string describe() const;
};

struct MollifiedProfile {
  struct Entry {
    double eps = 0.0;
    double eta = 0.0;
    double entropy_x = 0.0;
    double entropy_y = 0.0;
    double term = 0.0;  // |eps (E(S_eta x) + E(S_eta y))|
    double cost_gap = 0.0;  // cost between mollified endpoints minus the raw geodesic cost
  };
  CostProfile profile;
  std::vector<Entry> entries;  // same order as profile.rows
};

/// Checks along decreasing eps that the endpoint term is non-increasing
/// (ScheduleRejected otherwise), then solves between S_eta x and S_eta y.
MollifiedProfile mollified_sweep(const SpaceBackend& backend, const Point& x, const Point& y,
                                 std::span<const double> eps_list, const MollifySchedule& schedule,
                                 const SweepOptions& options = {});

}  // namespace schro
