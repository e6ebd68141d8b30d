#include "schro/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include <fmt/format.h>

#include "schro/errors.hpp"
#include "schro/hat.hpp"
#include "schro/regularizer.hpp"

namespace schro {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool descends(const std::vector<double>& history) {
  for (std::size_t k = 1; k < history.size(); ++k)
    if (history[k] > history[k - 1] + 1e-12 * std::max(1.0, std::abs(history[k - 1]))) return false;
  return true;
}

ProfileRow row_of(SchrodingerResult&& r) {
  ProfileRow row;
  row.eps = r.eps;
  row.cost = r.cost;
  row.kinetic = r.kinetic;
  row.fisher = r.fisher;
  row.converged = r.converged;
  row.iterations = r.iterations;
  row.stationarity = r.stationarity;
  row.monotone_descent = descends(r.history);
  row.minimizer = std::make_shared<const Curve>(std::move(r.minimizer));
  return row;
}

std::vector<double> checked_eps(std::span<const double> eps_list) {
  if (eps_list.empty()) fail(ErrorCode::domain_error, "eps list is empty");
  std::vector<double> eps(eps_list.begin(), eps_list.end());
  for (double e : eps)
    if (!(e >= 0.0) || !std::isfinite(e)) fail(ErrorCode::domain_error, "eps values must be finite and >= 0");
  std::sort(eps.begin(), eps.end());
  if (std::adjacent_find(eps.begin(), eps.end()) != eps.end())
    fail(ErrorCode::domain_error, "eps values must be distinct");
  return eps;
}

std::vector<const ProfileRow*> converged_rows(const CostProfile& profile) {
  std::vector<const ProfileRow*> out;
  for (const auto& r : profile.rows)
    if (r.converged) out.push_back(&r);
  return out;
}

const ProfileRow& zero_row(const CostProfile& profile) {
  const ProfileRow* z = profile.find(0.0);
  if (!z) fail(ErrorCode::profile_incomplete, "profile has no eps = 0 row; add 0 to the eps list");
  return *z;
}

}  // namespace

void CostProfile::validate() const {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!(rows[k].eps >= 0.0)) fail(ErrorCode::domain_error, "profile eps must be >= 0");
    if (k > 0 && !(rows[k].eps > rows[k - 1].eps))
      fail(ErrorCode::domain_error, "profile rows must be strictly increasing in eps");
  }
}

const ProfileRow* CostProfile::find(double eps) const {
  for (const auto& r : rows)
    if (r.eps == eps) return &r;
  return nullptr;
}

CostProfile sweep(const SpaceBackend& backend, const Point& x, const Point& y,
                  std::span<const double> eps_list, const SweepOptions& options) {
  const std::vector<double> eps = checked_eps(eps_list);
  options.solver.validate();
  if (eps.back() > 0.0 && (!std::isfinite(backend.entropy(x)) || !std::isfinite(backend.entropy(y))))
    fail(ErrorCode::endpoint_entropy_infinite,
         "an endpoint has infinite entropy; use mollified_sweep with a mollification schedule");

  CostProfile profile;
  profile.geodesic_cost = geodesic_cost(backend, x, y);
  profile.rows.resize(eps.size());

  if (!options.chain && options.parallel) {
    std::vector<std::future<SchrodingerResult>> jobs;
    jobs.reserve(eps.size());
    for (double e : eps)
      jobs.push_back(std::async(std::launch::async, [&, e] { return solve(backend, x, y, e, options.solver); }));
    for (std::size_t k = 0; k < eps.size(); ++k) profile.rows[k] = row_of(jobs[k].get());
    return profile;
  }

  std::vector<double> state;
  for (std::size_t k = eps.size(); k-- > 0;) {
    SolverOptions so = options.solver;
    // eps = 0 keeps the configured start so the density backend takes its closed form
    if (options.chain && !state.empty() && eps[k] > 0.0) so.warm_start = WarmStart::from_state(state);
    SchrodingerResult r = solve(backend, x, y, eps[k], so);
    state = r.state;
    profile.rows[k] = row_of(std::move(r));
  }
  return profile;
}

double fisher_monotonicity(const CostProfile& profile) {
  profile.validate();
  const auto rows = converged_rows(profile);
  if (rows.size() < 2) fail(ErrorCode::domain_error, "fisher monotonicity needs two converged rows");
  double worst = kNegInf;
  for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, rows[k]->fisher - rows[k - 1]->fisher);
  return worst;
}

double cost_monotonicity(const CostProfile& profile) {
  profile.validate();
  const auto rows = converged_rows(profile);
  if (rows.size() < 2) fail(ErrorCode::domain_error, "cost monotonicity needs two converged rows");
  double worst = kNegInf;
  for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, rows[k - 1]->cost - rows[k]->cost);
  return worst;
}

std::vector<DerivativeResidual> derivative_check(const CostProfile& profile) {
  profile.validate();
  const auto& rows = profile.rows;
  if (rows.size() < 3) fail(ErrorCode::domain_error, "derivative check needs three rows");
  std::vector<DerivativeResidual> out;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    DerivativeResidual d;
    d.eps = rows[k].eps;
    d.quotient = (rows[k + 1].cost - rows[k - 1].cost) / (rows[k + 1].eps - rows[k - 1].eps);
    d.predicted = 2.0 * d.eps * rows[k].fisher;
    d.abs_error = std::abs(d.quotient - d.predicted);
    d.rel_error = d.abs_error == 0.0 ? 0.0 : d.abs_error / std::max(std::abs(d.predicted), 1e-300);
    out.push_back(d);
  }
  return out;
}

TaylorReport taylor_check(const CostProfile& profile, double rel_tol, double upper_slack) {
  profile.validate();
  const ProfileRow& z = zero_row(profile);
  if (!std::isfinite(z.fisher))
    fail(ErrorCode::profile_incomplete, "the eps = 0 minimizer has infinite Fisher action");
  TaylorReport rep;
  rep.fisher0 = z.fisher;
  rep.worst_upper_excess = kNegInf;
  for (const auto& r : profile.rows) {
    if (r.eps == 0.0) continue;
    TaylorReport::Entry e;
    e.eps = r.eps;
    e.ratio = (r.cost - z.cost) / (r.eps * r.eps);
    e.upper_excess = r.cost - z.cost - r.eps * r.eps * z.fisher;
    rep.worst_upper_excess = std::max(rep.worst_upper_excess, e.upper_excess);
    rep.entries.push_back(e);
  }
  if (rep.entries.empty()) fail(ErrorCode::profile_incomplete, "profile has no eps > 0 rows");
  rep.limit_estimate = rep.entries.front().ratio;
  const double scale = std::max(std::abs(rep.fisher0), 1e-300);
  rep.rel_error_at_smallest = rep.fisher0 == rep.limit_estimate ? 0.0 : std::abs(rep.limit_estimate - rep.fisher0) / scale;
  rep.approaches_monotonically = true;
  for (std::size_t k = 1; k < rep.entries.size(); ++k)
    if (std::abs(rep.entries[k - 1].ratio - rep.fisher0) > std::abs(rep.entries[k].ratio - rep.fisher0))
      rep.approaches_monotonically = false;
  rep.pass = rep.rel_error_at_smallest <= rel_tol && rep.approaches_monotonically &&
             rep.worst_upper_excess <= upper_slack;
  return rep;
}

GammaReport gamma_diagnostics(const SpaceBackend& backend, const CostProfile& profile,
                              const SolverOptions& options, double slack) {
  profile.validate();
  const ProfileRow& z = zero_row(profile);
  const Curve& omega0 = *z.minimizer;
  GammaReport rep;
  for (auto it = profile.rows.rbegin(); it != profile.rows.rend(); ++it) {
    if (it->eps == 0.0) continue;
    const Curve& w = *it->minimizer;
    if (w.size() != omega0.size()) fail(ErrorCode::domain_error, "profile minimizers use different grids");
    GammaReport::Entry e;
    e.eps = it->eps;
    e.excess = it->cost - z.cost;
    for (std::size_t i = 0; i < w.size(); ++i) e.distance = std::max(e.distance, backend.distance(w[i], omega0[i]));
    const RegularizedCurve reg = build_regularized(backend, omega0, HatFunction::recovery(it->eps));
    e.recovery_excess = evaluate(backend, reg.tilde, it->eps, options).cost - it->cost;
    rep.entries.push_back(e);
  }
  for (std::size_t k = 0; k + 1 < rep.entries.size(); ++k) {
    auto& a = rep.entries[k];
    const auto& b = rep.entries[k + 1];
    if (a.excess > 0.0 && b.excess > 0.0) a.rate = std::log(a.excess / b.excess) / std::log(a.eps / b.eps);
  }
  rep.excess_positive_decreasing = true;
  rep.distance_decreasing = true;
  rep.recovery_nonnegative = true;
  rep.recovery_decreasing = true;
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    if (!(e.excess > 0.0)) rep.excess_positive_decreasing = false;
    if (e.recovery_excess < -slack) rep.recovery_nonnegative = false;
    if (k == 0) continue;
    const auto& prev = rep.entries[k - 1];
    if (!(e.excess < prev.excess)) rep.excess_positive_decreasing = false;
    if (!(e.distance < prev.distance)) rep.distance_decreasing = false;
    if (e.recovery_excess > prev.recovery_excess + slack) rep.recovery_decreasing = false;
  }
  rep.pass = rep.excess_positive_decreasing && rep.distance_decreasing && rep.recovery_nonnegative &&
             rep.recovery_decreasing;
  return rep;
}

double MollifySchedule::eta(double eps) const {
  if (scale == 0.0 || eps == 0.0) return 0.0;
  return scale * std::pow(eps, exponent);
}

std::string MollifySchedule::describe() const {
  if (scale == 0.0) return "none";
  return fmt::format("eta = {} * eps^{}", scale, exponent);
}

MollifiedProfile mollified_sweep(const SpaceBackend& backend, const Point& x, const Point& y,
                                 std::span<const double> eps_list, const MollifySchedule& schedule,
                                 const SweepOptions& options) {
  const std::vector<double> eps = checked_eps(eps_list);
  options.solver.validate();
  if (!(schedule.scale >= 0.0) || !std::isfinite(schedule.exponent))
    fail(ErrorCode::domain_error, "invalid mollification schedule");

  MollifiedProfile out;
  out.profile.geodesic_cost = geodesic_cost(backend, x, y);
  std::vector<Point> xs;
  std::vector<Point> ys;
  out.entries.resize(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    auto& e = out.entries[k];
    e.eps = eps[k];
    e.eta = schedule.eta(eps[k]);
    xs.push_back(e.eta > 0.0 ? backend.flow(x, e.eta) : x);
    ys.push_back(e.eta > 0.0 ? backend.flow(y, e.eta) : y);
    e.entropy_x = backend.entropy(xs.back());
    e.entropy_y = backend.entropy(ys.back());
    e.term = eps[k] == 0.0 ? 0.0 : std::abs(eps[k] * (e.entropy_x + e.entropy_y));
    if (eps[k] > 0.0 && !std::isfinite(e.term))
      fail(ErrorCode::schedule_rejected,
           fmt::format("mollified endpoints still have infinite entropy at eps = {}", eps[k]));
  }
  // Walking towards eps = 0 the endpoint term must not grow.
  for (std::size_t k = eps.size() - 1; k-- > 0;) {
    const auto& small = out.entries[k];
    const auto& large = out.entries[k + 1];
    if (small.eps > 0.0 && small.term > large.term * (1.0 + 1e-12))
      fail(ErrorCode::schedule_rejected,
           fmt::format("schedule {}: eps (E(x_eta) + E(y_eta)) grows from {:.6g} at eps = {} to {:.6g} at eps = {}",
                       schedule.describe(), large.term, large.eps, small.term, small.eps));
  }

  out.profile.rows.resize(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    out.profile.rows[k] = row_of(solve(backend, xs[k], ys[k], eps[k], options.solver));
    out.entries[k].cost_gap = out.profile.rows[k].cost - out.profile.geodesic_cost;
  }
  return out;
}

}  // namespace schro
