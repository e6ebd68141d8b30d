#include "schro/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/io.hpp"

namespace schro {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

class Reader {
 public:
  Reader(const std::string& text, std::filesystem::path source) : source_(std::move(source)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      fail(ErrorCode::config, fmt::format("{}:{}: {}", source_.string(), e.line(), e.message()));
    }
    // property_tree drops line numbers; recover them for messages
    std::istringstream again(text);
    std::string line;
    std::string section;
    for (std::size_t no = 1; std::getline(again, line); ++no) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t[0] == '[') {
        section = trim(t.substr(1, t.find(']') - 1));
        lines_[{section, ""}] = no;
        continue;
      }
      lines_[{section, trim(t.substr(0, t.find('=')))}] = no;
    }
  }

  [[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& why) const {
    const auto it = lines_.find({section, key});
    const std::string where =
        it == lines_.end() ? source_.string() : fmt::format("{}:{}", source_.string(), it->second);
    if (key.empty()) fail(ErrorCode::config, fmt::format("{}: [{}]: {}", where, section, why));
    fail(ErrorCode::config, fmt::format("{}: [{}] {}: {}", where, section, key, why));
  }

  void check_layout(const std::map<std::string, std::set<std::string>>& allowed) const {
    for (const auto& [name, sub] : tree_) {
      if (sub.empty()) bad("", name, "keys must belong to a section");
      const auto it = allowed.find(name);
      if (it == allowed.end()) bad(name, "", "unknown section");
      for (const auto& [key, leaf] : sub) {
        if (!leaf.empty()) bad(name, key, "nested keys are not supported");
        if (!it->second.count(key)) bad(name, key, "unknown key");
      }
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    return sec && sec->find(key) != sec->not_found();
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return trim(tree_.get_child(section).find(key)->second.data());
  }

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
  }

  std::string required(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v || v->empty()) bad(section, key, "missing");
    return *v;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    return to_number(section, key, *v);
  }

  double to_number(const std::string& section, const std::string& key, const std::string& v) const {
    try {
      const double d = parse_double(v);
      if (!std::isfinite(d)) bad(section, key, fmt::format("'{}' is not a finite number", v));
      return d;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config) throw;
      bad(section, key, fmt::format("'{}' is not a number", v));
    }
  }

  std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    const double d = to_number(section, key, *v);
    if (d < 0.0 || d != std::floor(d) || d > 1e15)
      bad(section, key, fmt::format("'{}' is not a non-negative integer", *v));
    return static_cast<std::size_t>(d);
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    bad(section, key, fmt::format("'{}' is not a boolean (true/false)", *v));
  }

  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& cell : split(*v, ',')) {
      if (cell.empty()) bad(section, key, "empty list entry");
      out.push_back(to_number(section, key, cell));
    }
    if (out.empty()) bad(section, key, "empty list");
    return out;
  }

 private:
  pt::ptree tree_;
  std::filesystem::path source_;
  std::map<std::pair<std::string, std::string>, std::size_t> lines_;
};

const std::set<std::string> kEuclideanKeys{"center", "strength"};
const std::set<std::string> kDensityKeys{"entropy", "m", "x_min", "x_max", "n", "boundary", "substep_factor"};

std::set<std::string> run_keys() {
  std::set<std::string> keys{"command",         "eps",           "eps_list",
                             "n_time",          "max_iter",      "grad_tol",
                             "levels",          "memory",        "warm_start",
                             "chain",           "parallel",      "seed",
                             "taylor",          "derivative",    "gamma",
                             "tol_taylor_rel",  "taylor_upper_slack", "tol_derivative_rel",
                             "tol_fisher_monotonicity", "tol_cost_monotonicity", "gamma_slack",
                             "properties",      "verify_times",  "ede_horizon",
                             "cert_eps",        "cert_intervals", "pointwise_intervals",
                             "samples"};
  for (const auto& p : verify_property_names()) keys.insert("tol_" + p);
  return keys;
}

MollifySchedule parse_schedule(const Reader& r, const std::string& v) {
  if (v == "none") return MollifySchedule::none();
  if (v.rfind("power(", 0) == 0 && v.back() == ')') {
    const auto args = split(v.substr(6, v.size() - 7), ',');
    if (args.size() == 1 || args.size() == 2) {
      const double p = r.to_number("endpoints", "mollify", args[0]);
      const double scale = args.size() == 2 ? r.to_number("endpoints", "mollify", args[1]) : 1.0;
      if (!(p > 0.0)) r.bad("endpoints", "mollify", "the exponent must be positive");
      if (!(scale > 0.0)) r.bad("endpoints", "mollify", "the scale must be positive");
      return MollifySchedule::power(p, scale);
    }
  }
  r.bad("endpoints", "mollify", fmt::format("'{}' is not none or power(exponent[, scale])", v));
}

}  // namespace

const std::vector<std::string>& verify_property_names() {
  static const std::vector<std::string> names{
      "evi",          "contraction",       "ede",          "regularization", "slope_monotonicity",
      "local_global", "discrete_estimate", "pointwise_estimate", "recovery_gap", "convexity"};
  return names;
}

double default_tolerance(BackendConfig::Kind kind, const std::string& property) {
  if (kind == BackendConfig::Kind::euclidean) {
    if (property == "discrete_estimate") return 1e-8;
    if (property == "convexity" || property == "recovery_gap") return 1e-9;
    return 1e-6;
  }
  static const std::map<std::string, double> density{
      {"evi", 5e-3},          {"contraction", 2e-3},       {"ede", 2e-2},
      {"regularization", 5e-3}, {"slope_monotonicity", 1e-6}, {"local_global", 1e-3},
      {"discrete_estimate", 5e-3}, {"pointwise_estimate", 1e-2}, {"recovery_gap", 5e-3},
      {"convexity", 1e-3}};
  const auto it = density.find(property);
  if (it == density.end()) fail(ErrorCode::config, "unknown property '" + property + "'");
  return it->second;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  const Reader r(text, source);
  std::set<std::string> backend_keys{"kind", "lambda"};
  backend_keys.insert(kEuclideanKeys.begin(), kEuclideanKeys.end());
  backend_keys.insert(kDensityKeys.begin(), kDensityKeys.end());
  r.check_layout({{"backend", backend_keys},
                  {"endpoints", {"x", "y", "mollify"}},
                  {"run", run_keys()},
                  {"output", {"directory", "formats"}}});

  ExperimentConfig c;
  c.source = source;

  // [backend]
  BackendConfig& b = c.backend;
  const std::string kind = r.required("backend", "kind");
  if (kind == "euclidean")
    b.kind = BackendConfig::Kind::euclidean;
  else if (kind == "density")
    b.kind = BackendConfig::Kind::density;
  else
    r.bad("backend", "kind", fmt::format("'{}' is not euclidean or density", kind));
  const auto& foreign = b.kind == BackendConfig::Kind::euclidean ? kDensityKeys : kEuclideanKeys;
  for (const auto& k : foreign)
    if (r.has("backend", k)) r.bad("backend", k, fmt::format("does not apply to kind = {}", kind));
  double lambda = 0.0;
  if (b.kind == BackendConfig::Kind::euclidean) {
    b.center = r.numbers("backend", "center", {0.0});
    b.strength = r.number("backend", "strength", 1.0);
    if (!(b.strength > 0.0)) r.bad("backend", "strength", "must be positive");
    lambda = b.strength;
  } else {
    b.entropy = r.text("backend", "entropy", "boltzmann");
    if (b.entropy != "boltzmann" && b.entropy != "porous_medium")
      r.bad("backend", "entropy", fmt::format("'{}' is not boltzmann or porous_medium", b.entropy));
    if (r.has("backend", "m") && b.entropy != "porous_medium")
      r.bad("backend", "m", "only applies to entropy = porous_medium");
    b.m = r.number("backend", "m", 2.0);
    if (!(b.m > 1.0)) r.bad("backend", "m", "must be > 1");
    b.x_min = r.number("backend", "x_min", -8.0);
    b.x_max = r.number("backend", "x_max", 10.0);
    if (!(b.x_max > b.x_min)) r.bad("backend", "x_max", "must exceed x_min");
    b.n = r.count("backend", "n", 256);
    if (b.n < 4) r.bad("backend", "n", "needs at least 4 cells");
    const std::string boundary = r.text("backend", "boundary", "no_flux");
    if (boundary == "no_flux")
      b.boundary = Boundary::no_flux;
    else if (boundary == "periodic")
      b.boundary = Boundary::periodic;
    else
      r.bad("backend", "boundary", fmt::format("'{}' is not no_flux or periodic", boundary));
    b.substep_factor = r.number("backend", "substep_factor", 0.5);
    if (!(b.substep_factor > 0.0 && b.substep_factor <= 0.5))
      r.bad("backend", "substep_factor", "must lie in (0, 0.5]");
  }
  if (r.has("backend", "lambda")) {
    const double given = r.number("backend", "lambda", lambda);
    if (given != lambda)
      r.bad("backend", "lambda", fmt::format("{} contradicts the backend's contraction parameter {}", given, lambda));
  }

  // [endpoints]
  c.endpoints.x = r.required("endpoints", "x");
  c.endpoints.y = r.required("endpoints", "y");
  if (const auto m = r.raw("endpoints", "mollify")) {
    if (b.kind != BackendConfig::Kind::density) r.bad("endpoints", "mollify", "only applies to kind = density");
    const MollifySchedule s = parse_schedule(r, *m);
    if (s.scale != 0.0) c.endpoints.mollify = s;
  }

  // [run]
  RunConfig& run = c.run;
  if (const auto cmd = r.raw("run", "command")) {
    if (*cmd != "solve" && *cmd != "sweep" && *cmd != "verify")
      r.bad("run", "command", fmt::format("'{}' is not solve, sweep or verify", *cmd));
    run.command = *cmd;
  }
  run.eps = r.number("run", "eps", 0.0);
  if (!(run.eps >= 0.0)) r.bad("run", "eps", "must be >= 0");
  run.eps_list = r.numbers("run", "eps_list", {0.0});
  for (double e : run.eps_list)
    if (!(e >= 0.0)) r.bad("run", "eps_list", fmt::format("{} is negative", e));
  std::sort(run.eps_list.begin(), run.eps_list.end());
  run.eps_list.erase(std::unique(run.eps_list.begin(), run.eps_list.end()), run.eps_list.end());

  SolverOptions& so = run.solver;
  so.n_time = r.count("run", "n_time", so.n_time);
  if (so.n_time < 3) r.bad("run", "n_time", "must be at least 3");
  so.max_iter = r.count("run", "max_iter", so.max_iter);
  if (so.max_iter < 1) r.bad("run", "max_iter", "must be at least 1");
  if (r.has("run", "grad_tol")) {
    so.grad_tol = r.number("run", "grad_tol", 0.0);
    if (!(*so.grad_tol > 0.0)) r.bad("run", "grad_tol", "must be positive");
  }
  so.levels = r.count("run", "levels", 0);
  if (so.levels != 0 && so.levels < 4) r.bad("run", "levels", "must be 0 (automatic) or at least 4");
  so.memory = r.count("run", "memory", so.memory);
  if (so.memory < 1) r.bad("run", "memory", "must be positive");
  const std::string warm = r.text("run", "warm_start", "regularized_geodesic");
  if (warm == "regularized_geodesic")
    so.warm_start = WarmStart::regularized_geodesic();
  else if (warm == "straight")
    so.warm_start = WarmStart::straight();
  else
    r.bad("run", "warm_start", fmt::format("'{}' is not regularized_geodesic or straight", warm));

  run.chain = r.flag("run", "chain", true);
  run.parallel = r.flag("run", "parallel", false);
  if (run.parallel && run.chain) r.bad("run", "parallel", "needs chain = false");
  run.seed = r.count("run", "seed", 0);

  run.taylor = r.flag("run", "taylor", true);
  run.derivative = r.flag("run", "derivative", true);
  run.gamma = r.flag("run", "gamma", true);
  const auto positive = [&](const char* key, double fallback) {
    const double v = r.number("run", key, fallback);
    if (!(v > 0.0)) r.bad("run", key, "must be positive");
    return v;
  };
  run.tol_taylor_rel = positive("tol_taylor_rel", 0.05);
  run.taylor_upper_slack = positive("taylor_upper_slack", 1e-3);
  run.tol_derivative_rel = positive("tol_derivative_rel", 0.1);
  run.tol_fisher_monotonicity =
      positive("tol_fisher_monotonicity", b.kind == BackendConfig::Kind::euclidean ? 1e-6 : 1e-3);
  run.tol_cost_monotonicity = positive("tol_cost_monotonicity", 1e-6);
  run.gamma_slack = positive("gamma_slack", 1e-8);

  const auto& names = verify_property_names();
  if (const auto props = r.raw("run", "properties")) {
    for (const auto& p : split(*props, ',')) {
      if (std::find(names.begin(), names.end(), p) == names.end())
        r.bad("run", "properties", fmt::format("unknown property '{}'", p));
      if (std::find(run.properties.begin(), run.properties.end(), p) == run.properties.end())
        run.properties.push_back(p);
    }
  } else {
    run.properties = names;
  }
  for (const auto& p : names) {
    const std::string key = "tol_" + p;
    const double tol = r.number("run", key, default_tolerance(b.kind, p));
    // 0 is allowed: it demands the inequality hold exactly
    if (!(tol >= 0.0)) r.bad("run", key, "must be >= 0");
    run.tolerances[p] = tol;
  }
  run.verify_times = r.numbers("run", "verify_times", run.verify_times);
  for (std::size_t k = 0; k < run.verify_times.size(); ++k)
    if (!(run.verify_times[k] > 0.0) || (k > 0 && !(run.verify_times[k] > run.verify_times[k - 1])))
      r.bad("run", "verify_times", "must be positive and strictly increasing");
  run.ede_horizon = positive("ede_horizon", 0.1);
  run.cert_eps = r.numbers("run", "cert_eps", run.cert_eps);
  for (double e : run.cert_eps)
    if (!(e > 0.0)) r.bad("run", "cert_eps", "entries must be positive");
  run.cert_intervals = r.count("run", "cert_intervals", 64);
  if (run.cert_intervals < 2 || run.cert_intervals % 2) r.bad("run", "cert_intervals", "must be even and >= 2");
  run.pointwise_intervals = r.count("run", "pointwise_intervals", 128);
  if (run.pointwise_intervals < 4 || run.pointwise_intervals % 2)
    r.bad("run", "pointwise_intervals", "must be even and >= 4");
  run.samples = r.count("run", "samples", 4);

  // [output]
  c.output.directory = r.text("output", "directory", "out");
  if (c.output.directory.empty()) r.bad("output", "directory", "must not be empty");
  if (const auto f = r.raw("output", "formats")) {
    c.output.csv = false;
    c.output.json = false;
    for (const auto& fmt_name : split(*f, ',')) {
      if (fmt_name == "csv")
        c.output.csv = true;
      else if (fmt_name == "json")
        c.output.json = true;
      else
        r.bad("output", "formats", fmt::format("unknown format '{}'", fmt_name));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return parse_config(text, path);
}

std::unique_ptr<SpaceBackend> make_backend(const BackendConfig& c) {
  if (c.kind == BackendConfig::Kind::euclidean)
    return std::make_unique<EuclideanBackend>(Potential::quadratic(c.center, c.strength));
  const EntropyKind kind = c.entropy == "boltzmann" ? EntropyKind::boltzmann() : EntropyKind::porous_medium(c.m);
  DensityFlowOptions opts;
  opts.substep_factor = c.substep_factor;
  return std::make_unique<DensityBackend>(Grid::over(c.x_min, c.x_max, c.n, c.boundary), kind, opts);
}

Point make_endpoint(const std::string& spec, const SpaceBackend& backend, const BackendConfig& config,
                    const std::filesystem::path& base_dir) {
  const auto parse_double = [&spec](const std::string& cell) {
    try {
      return schro::parse_double(cell);
    } catch (const Error&) {
      fail(ErrorCode::config, fmt::format("endpoint '{}': '{}' is not a number", spec, cell));
    }
  };
  if (config.kind == BackendConfig::Kind::euclidean) {
    Coords x;
    for (const auto& cell : split(spec, ',')) x.push_back(parse_double(cell));
    if (x.size() != config.center.size())
      fail(ErrorCode::config, fmt::format("endpoint '{}' has {} coordinates, the potential lives in dimension {}",
                                          spec, x.size(), config.center.size()));
    return Point(std::move(x));
  }
  const auto& grid = dynamic_cast<const DensityBackend&>(backend).grid();
  const auto open = spec.find('(');
  const std::string name = trim(spec.substr(0, open));
  std::string inner;
  if (open != std::string::npos) {
    if (spec.back() != ')') fail(ErrorCode::config, fmt::format("endpoint '{}': missing ')'", spec));
    inner = spec.substr(open + 1, spec.size() - open - 2);
  }
  const auto args = [&] {
    std::vector<double> v;
    for (const auto& cell : split(inner, ',')) v.push_back(parse_double(cell));
    return v;
  };
  if (name == "gaussian") {
    const auto a = args();
    if (a.size() != 2 || !(a[1] > 0.0)) fail(ErrorCode::config, "gaussian(mean, sigma) needs sigma > 0");
    return Point(gaussian(grid, a[0], a[1]));
  }
  if (name == "near_dirac") {
    const auto a = args();
    if (a.size() != 1) fail(ErrorCode::config, "near_dirac(x0) takes one argument");
    return Point(near_dirac(grid, a[0]));
  }
  if (name == "uniform" && inner.empty()) return Point(uniform_density(grid));
  if (name == "mixture") {
    std::vector<double> w, m, s;
    for (const auto& comp : split(inner, ',')) {
      const auto parts = split(comp, ':');
      if (parts.size() != 3) fail(ErrorCode::config, "mixture components are weight:mean:sigma");
      w.push_back(parse_double(parts[0]));
      m.push_back(parse_double(parts[1]));
      s.push_back(parse_double(parts[2]));
    }
    return Point(gaussian_mixture(grid, w, m, s));
  }
  if (name == "file") {
    std::filesystem::path p = trim(inner);
    if (p.is_relative()) p = base_dir / p;
    std::istringstream in(read_text_file(p));
    return Point(read_density_csv(in, grid));
  }
  fail(ErrorCode::config, fmt::format("unknown density endpoint '{}'", spec));
}

}  // namespace schro
