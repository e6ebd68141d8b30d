#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "schro/analysis.hpp"
#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/hat.hpp"
#include "schro/io.hpp"
#include "schro/regularizer.hpp"
#include "schro/solver.hpp"
#include "schro/verify.hpp"

namespace schro::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Setup {
  std::unique_ptr<SpaceBackend> backend;
  std::optional<Point> x;
  std::optional<Point> y;
};

Setup prepare(const ExperimentConfig& c) {
  Setup s;
  s.backend = make_backend(c.backend);
  const auto dir = c.source.has_parent_path() ? c.source.parent_path() : std::filesystem::path(".");
  const auto endpoint = [&](const std::string& spec, const char* key) {
    try {
      return make_endpoint(spec, *s.backend, c.backend, dir);
    } catch (const Error& e) {
      fail(ErrorCode::config, fmt::format("{}: [endpoints] {}: {}", c.source.string(), key, e.what()));
    }
  };
  s.x = endpoint(c.endpoints.x, "x");
  s.y = endpoint(c.endpoints.y, "y");
  return s;
}

Json header(const ExperimentConfig& c, const SpaceBackend& backend, const char* command) {
  return {{"command", command},
          {"config", c.source.filename().string()},
          {"backend", backend.name()},
          {"lambda", backend.lambda()},
          {"seed", c.run.seed}};
}

void emit(const ExperimentConfig& c, const char* name, const std::string& text) {
  write_text_file(c.output.directory / name, text);
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

Json to_json(const Check& k) {
  return {{"check", k.name}, {"value", k.value}, {"tolerance", k.tolerance}, {"pass", k.pass}};
}

}  // namespace

int cmd_solve(const ExperimentConfig& c) {
  Setup s = prepare(c);
  const double eps = c.run.eps;
  Point x = *s.x;
  Point y = *s.y;
  double eta = 0.0;
  if (c.endpoints.mollify) {
    eta = c.endpoints.mollify->eta(eps);
    if (eta > 0.0) {
      x = s.backend->flow(x, eta);
      y = s.backend->flow(y, eta);
    }
  }
  const SchrodingerResult r = solve(*s.backend, x, y, eps, c.run.solver);
  bool descent = true;
  for (std::size_t k = 1; k < r.history.size(); ++k)
    if (r.history[k] > r.history[k - 1] + 1e-12 * std::max(1.0, std::abs(r.history[k - 1]))) descent = false;

  if (c.output.csv) {
    std::ostringstream out;
    write_curve_csv(out, r.minimizer);
    emit(c, "curve.csv", out.str());
  }
  if (c.output.json) {
    Json j = header(c, *s.backend, "solve");
    j["eps"] = eps;
    j["eta"] = eta;
    j["cost"] = r.cost;
    j["kinetic"] = r.kinetic;
    j["fisher"] = r.fisher;
    j["geodesic_cost"] = geodesic_cost(*s.backend, x, y);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["stationarity"] = r.stationarity;
    j["monotone_descent"] = descent;
    emit(c, "result.json", dump_json(j));
  }
  fmt::print("solve eps={} cost={} kinetic={} fisher={} iterations={} converged={}\n", format_double(eps),
             format_double(r.cost), format_double(r.kinetic), format_double(r.fisher), r.iterations,
             r.converged);
  return r.converged ? ok : failed;
}

int cmd_sweep(const ExperimentConfig& c) {
  const RunConfig& run = c.run;
  const bool has_zero = std::find(run.eps_list.begin(), run.eps_list.end(), 0.0) != run.eps_list.end();
  if (!c.endpoints.mollify && (run.taylor || run.gamma) && !has_zero)
    fail(ErrorCode::profile_incomplete,
         fmt::format("{}: [run] eps_list: the taylor and gamma checks need an eps = 0 row", c.source.string()));

  Setup s = prepare(c);
  SweepOptions so;
  so.solver = run.solver;
  so.chain = run.chain;
  so.parallel = run.parallel;

  Json j = header(c, *s.backend, "sweep");
  std::vector<Check> checks;
  CostProfile profile;
  if (c.endpoints.mollify) {
    const MollifiedProfile m = mollified_sweep(*s.backend, *s.x, *s.y, run.eps_list, *c.endpoints.mollify, so);
    profile = m.profile;
    j["schedule"] = c.endpoints.mollify->describe();
    j["mollified"] = schro::to_json(m);
    // each row has its own endpoints, so the fixed-endpoint checks do not apply
    j["skipped"] = "taylor, derivative, gamma and monotonicity checks need fixed endpoints";
    // |cost(eps) - cost_0(x, y)| must shrink as eps decreases
    double growth = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < m.entries.size(); ++k)
      if (m.entries[k - 1].eps > 0.0)
        growth = std::max(growth, std::abs(m.entries[k - 1].cost_gap) - std::abs(m.entries[k].cost_gap));
    if (std::isfinite(growth)) checks.push_back({"mollified_gap_decreasing", growth, 0.0, growth <= 0.0});
  } else {
    profile = sweep(*s.backend, *s.x, *s.y, run.eps_list, so);
    j["profile"] = schro::to_json(profile);
    std::size_t converged = 0;
    for (const auto& r : profile.rows) converged += r.converged;
    if (converged >= 2) {
      const double fm = fisher_monotonicity(profile);
      checks.push_back({"fisher_monotonicity", fm, run.tol_fisher_monotonicity, fm <= run.tol_fisher_monotonicity});
      const double cm = cost_monotonicity(profile);
      checks.push_back({"cost_monotonicity", cm, run.tol_cost_monotonicity, cm <= run.tol_cost_monotonicity});
    }
    if (run.derivative && profile.rows.size() >= 3) {
      const auto d = derivative_check(profile);
      double worst = 0.0;
      for (const auto& e : d) worst = std::max(worst, e.rel_error);
      j["derivative"] = schro::to_json(d);
      checks.push_back({"derivative_rel_error", worst, run.tol_derivative_rel, worst <= run.tol_derivative_rel});
    }
    if (run.taylor) {
      const TaylorReport t = taylor_check(profile, run.tol_taylor_rel, run.taylor_upper_slack);
      j["taylor"] = schro::to_json(t);
      checks.push_back({"taylor_rel_error", t.rel_error_at_smallest, run.tol_taylor_rel,
                        t.rel_error_at_smallest <= run.tol_taylor_rel});
      checks.push_back({"taylor_monotone_approach", t.approaches_monotonically ? 0.0 : 1.0, 0.0,
                        t.approaches_monotonically});
      checks.push_back({"taylor_upper_bound", t.worst_upper_excess, run.taylor_upper_slack,
                        t.worst_upper_excess <= run.taylor_upper_slack});
    }
    if (run.gamma) {
      const GammaReport g = gamma_diagnostics(*s.backend, profile, run.solver, run.gamma_slack);
      j["gamma"] = schro::to_json(g);
      const auto flag = [&](const char* name, bool ok_flag) {
        checks.push_back({name, ok_flag ? 0.0 : 1.0, 0.0, ok_flag});
      };
      flag("gamma_excess_positive_decreasing", g.excess_positive_decreasing);
      flag("gamma_distance_decreasing", g.distance_decreasing);
      flag("gamma_recovery_nonnegative", g.recovery_nonnegative);
      flag("gamma_recovery_decreasing", g.recovery_decreasing);
    }
  }
  bool all_converged = true;
  bool descent = true;
  for (const auto& r : profile.rows) {
    all_converged = all_converged && r.converged;
    descent = descent && r.monotone_descent;
  }
  checks.push_back({"monotone_descent", descent ? 0.0 : 1.0, 0.0, descent});
  Json cj = Json::array();
  bool pass = all_converged;
  for (const auto& k : checks) {
    cj.push_back(to_json(k));
    pass = pass && k.pass;
  }
  j["checks"] = cj;
  j["all_converged"] = all_converged;
  j["pass"] = pass;

  if (c.output.csv) {
    std::ostringstream out;
    write_profile_csv(out, profile);
    emit(c, "profile.csv", out.str());
  }
  if (c.output.json) emit(c, "diagnostics.json", dump_json(j));
  for (const auto& r : profile.rows)
    fmt::print("eps={} cost={} fisher={} converged={}\n", format_double(r.eps), format_double(r.cost),
               format_double(r.fisher), r.converged);
  for (const auto& k : checks) fmt::print("{} {} ({})\n", k.pass ? "PASS" : "FAIL", k.name, format_double(k.value));
  return pass ? ok : failed;
}

int cmd_verify(const ExperimentConfig& c) {
  Setup s = prepare(c);
  const SpaceBackend& b = *s.backend;
  const Point& x = *s.x;
  const Point& y = *s.y;
  const RunConfig& run = c.run;
  std::mt19937_64 rng(run.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Random states near the endpoints: coordinate jitter, or Gaussians whose
  // mean and width are drawn around the domain center.
  const auto random_point = [&]() -> Point {
    if (x.is_coords()) {
      Coords p = x.coords();
      for (double& v : p) v += normal(rng);
      return Point(std::move(p));
    }
    const Grid& g = x.density().grid();
    const double mid = 0.5 * (g.x_min + g.x_max());
    const double spread = 0.1 * g.length();
    return Point(gaussian(g, mid + spread * (2.0 * uniform(rng) - 1.0), 0.5 + uniform(rng)));
  };

  std::vector<EviReport> reports;
  for (const auto& prop : run.properties) {
    const double tol = run.tolerances.at(prop);
    if (prop == "evi") {
      reports.push_back(evi_defect(b, x, y, run.verify_times, tol));
    } else if (prop == "contraction") {
      std::vector<std::pair<Point, Point>> pairs{{x, y}};
      for (std::size_t k = 0; k < run.samples; ++k) pairs.emplace_back(random_point(), random_point());
      reports.push_back(contraction_report(b, pairs, run.verify_times, tol));
    } else if (prop == "ede") {
      reports.push_back(ede_report(b, x, run.ede_horizon, tol));
    } else if (prop == "regularization") {
      reports.push_back(regularization_report(b, x, y, run.verify_times, tol));
    } else if (prop == "slope_monotonicity") {
      std::vector<double> times{0.0};
      times.insert(times.end(), run.verify_times.begin(), run.verify_times.end());
      reports.push_back(slope_monotonicity_report(b, x, times, tol));
    } else if (prop == "local_global") {
      std::vector<Point> samples{y};
      for (double d : {1e-4, 1e-3, 1e-2}) samples.push_back(b.flow(x, d));
      for (std::size_t k = 0; k < run.samples; ++k) samples.push_back(random_point());
      reports.push_back(local_global_report(b, x, samples, tol));
    } else if (prop == "discrete_estimate") {
      const Curve base = geodesic_curve(b, x, y, run.cert_intervals);
      EviReport rep{prop, -std::numeric_limits<double>::infinity(), 0, 0, tol, false};
      for (double e : run.cert_eps) {
        const PairSweep ps = discrete_estimate_sweep(b, build_regularized(b, base, HatFunction::recovery(e)));
        rep.worst_residual = std::max(rep.worst_residual, ps.worst);
        rep.samples += ps.pairs;
        rep.skipped += ps.skipped;
      }
      rep.pass = rep.worst_residual <= tol;
      reports.push_back(rep);
    } else if (prop == "pointwise_estimate") {
      const Curve base = geodesic_curve(b, x, y, run.pointwise_intervals);
      EviReport rep{prop, -std::numeric_limits<double>::infinity(), 0, 0, tol, false};
      for (double e : run.cert_eps) {
        const RegularizedCurve reg = build_regularized(b, base, HatFunction::recovery(e));
        for (std::size_t i = 1; i + 1 < base.size(); ++i) {
          if (2 * i == run.pointwise_intervals) {
            ++rep.skipped;  // peak of h: h' undefined
            continue;
          }
          rep.worst_residual = std::max(rep.worst_residual, pointwise_estimate_residual(b, reg, i));
          ++rep.samples;
        }
      }
      rep.pass = rep.worst_residual <= tol;
      reports.push_back(rep);
    } else if (prop == "recovery_gap") {
      const Curve base = geodesic_curve(b, x, y, run.cert_intervals);
      EviReport rep{prop, -std::numeric_limits<double>::infinity(), 0, 0, tol, false};
      for (double e : run.cert_eps) {
        rep.worst_residual = std::max(rep.worst_residual, -recovery_gap(b, base, e));
        ++rep.samples;
      }
      rep.pass = rep.worst_residual <= tol;
      reports.push_back(rep);
    } else if (prop == "convexity") {
      const auto thetas = unit_grid(33);
      const double v = convexity_certificate(b, x, y, thetas);
      reports.push_back({prop, v, thetas.size(), 0, tol, v <= tol});
    }
  }

  bool pass = true;
  Json list = Json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    list.push_back(schro::to_json(r));
  }
  if (c.output.json) {
    Json j = header(c, b, "verify");
    j["reports"] = list;
    j["pass"] = pass;
    emit(c, "diagnostics.json", dump_json(j));
  }
  if (c.output.csv) {
    std::ostringstream out;
    out << "property,worst_residual,samples,skipped,tolerance,pass\n";
    for (const auto& r : reports)
      out << r.property << ',' << format_double(r.worst_residual) << ',' << r.samples << ',' << r.skipped << ','
          << format_double(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
    emit(c, "reports.csv", out.str());
  }
  for (const auto& r : reports)
    fmt::print("{} {} residual={} tolerance={} samples={}\n", r.pass ? "PASS" : "FAIL", r.property,
               format_double(r.worst_residual), format_double(r.tolerance), r.samples);
  return pass ? ok : failed;
}

}  // namespace schro::cli
