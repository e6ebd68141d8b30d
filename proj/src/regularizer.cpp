#include "schro/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "schro/actions.hpp"
#include "schro/errors.hpp"

namespace schro {
namespace {

constexpr double kSmallLambda = 1e-8;

/// (e^{l d} + e^{-l d} - 2) / (2 l^2)
double height_factor(double lambda, double d) {
  if (std::abs(lambda) < kSmallLambda) return 0.5 * d * d;
  const double s = std::sinh(0.5 * lambda * d);
  return 2.0 * s * s / (lambda * lambda);
}

/// (1 - e^{-l d}) / l
double decay_factor(double lambda, double d) {
  if (std::abs(lambda) < kSmallLambda) return d;
  return -std::expm1(-lambda * d) / lambda;
}

}  // namespace

std::vector<double> unit_grid(std::size_t n) {
  if (n < 2) fail(ErrorCode::domain_error, "unit_grid needs at least two points");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = 1.0;
  return g;
}

Curve geodesic_curve(const SpaceBackend& backend, const Point& x, const Point& y,
                     std::size_t intervals) {
  const std::vector<double> t = uniform_times(intervals);
  std::vector<Point> pts;
  pts.reserve(t.size());
  pts.push_back(x);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) pts.push_back(backend.geodesic(x, y, t[i]));
  pts.push_back(y);
  return Curve(t, std::move(pts));
}

RegularizedCurve build_regularized(const SpaceBackend& backend, const Curve& base,
                                   const HatFunction& h) {
  std::vector<double> values(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) values[i] = h(base.time(i));
  RegularizedCurve reg = build_regularized(backend, base, values);
  reg.hat = h;
  return reg;
}

RegularizedCurve build_regularized(const SpaceBackend& backend, const Curve& base,
                                   std::span<const double> h) {
  check_curve(backend, base);
  if (h.size() != base.size()) fail(ErrorCode::domain_error, "need one h value per node");
  std::vector<Point> pts;
  pts.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!(h[i] >= 0.0)) fail(ErrorCode::domain_error, "h must be >= 0");
    pts.push_back(h[i] == 0.0 ? base[i] : backend.flow(base[i], h[i]));
  }
  Curve tilde(std::vector<double>(base.times().begin(), base.times().end()), std::move(pts));
  RegularizedCurve reg{base, std::vector<double>(h.begin(), h.end()), std::nullopt, std::move(tilde), {}, {}};
  reg.tilde_entropy.reserve(base.size());
  reg.tilde_slope.reserve(base.size());
  for (const Point& p : reg.tilde.points()) {
    reg.tilde_entropy.push_back(backend.entropy(p));
    reg.tilde_slope.push_back(backend.slope(p));
  }
  return reg;
}

std::optional<double> discrete_estimate_residual(const SpaceBackend& backend,
                                                 const RegularizedCurve& reg, std::size_t i,
                                                 std::size_t j) {
  const std::size_t n = reg.base.size();
  if (!(i < j && j < n)) fail(ErrorCode::domain_error, "need node indices i < j");
  const double lambda = backend.lambda();
  const double t0 = reg.base.time(i);
  const double t1 = reg.base.time(j);
  const double h0 = reg.h[i];
  const double h1 = reg.h[j];
  const double dt = t1 - t0;
  // t+ is the node with the larger smoothing time (ties go to t1).
  const bool up = h1 >= h0;
  const std::size_t ip = up ? j : i;
  const double tp = up ? t1 : t0;
  const double tm = up ? t0 : t1;
  const double hp = up ? h1 : h0;
  const double hm = up ? h0 : h1;

  const double dtilde = backend.distance(reg.tilde[j], reg.tilde[i]);
  const double dbase = backend.distance(reg.base[j], reg.base[i]);

  double lhs = 0.5 * (dtilde / dt) * (dtilde / dt);
  const double slope = reg.tilde_slope[ip];
  const double hf = height_factor(lambda, h1 - h0);
  if (std::isinf(slope)) {
    if (h0 != h1) return std::nullopt;  // (+inf) * 0 convention only covers equal heights
  } else {
    lhs += slope * slope * hf / (dt * dt);
  }
  if (hp != hm) {
    const double de = reg.tilde_entropy[j] - reg.tilde_entropy[i];
    lhs += decay_factor(lambda, hp - hm) / (tp - tm) * de / dt;
  }
  const double rhs = 0.5 * std::exp(-lambda * (h0 + h1)) * (dbase / dt) * (dbase / dt);
  return lhs - rhs;
}

PairSweep discrete_estimate_sweep(const SpaceBackend& backend, const RegularizedCurve& reg,
                                  bool adjacent_only) {
  PairSweep out;
  out.worst = -std::numeric_limits<double>::infinity();
  const std::size_t n = reg.base.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t last = adjacent_only ? i + 2 : n;
    for (std::size_t j = i + 1; j < last; ++j) {
      const auto r = discrete_estimate_residual(backend, reg, i, j);
      if (!r) {
        ++out.skipped;
        continue;
      }
      out.worst = std::max(out.worst, *r);
      ++out.pairs;
    }
  }
  return out;
}

double pointwise_estimate_residual(const SpaceBackend& backend, const RegularizedCurve& reg,
                                   std::size_t i) {
  const std::size_t n = reg.base.size();
  if (!(i > 0 && i + 1 < n)) fail(ErrorCode::domain_error, "pointwise estimate needs an interior node");
  if (reg.hat && reg.hat->eps() != 0.0 && reg.base.time(i) == reg.hat->theta())
    fail(ErrorCode::not_applicable, "h is not differentiable at the peak node");
  const double span = reg.base.time(i + 1) - reg.base.time(i - 1);
  const double speed_tilde = backend.distance(reg.tilde[i + 1], reg.tilde[i - 1]) / span;
  const double speed_base = backend.distance(reg.base[i + 1], reg.base[i - 1]) / span;
  const double dh = (reg.h[i + 1] - reg.h[i - 1]) / span;
  const double de = (reg.tilde_entropy[i + 1] - reg.tilde_entropy[i - 1]) / span;
  const double slope = reg.tilde_slope[i];
  double lhs = 0.5 * speed_tilde * speed_tilde + dh * de;
  if (dh != 0.0) {
    if (std::isinf(slope)) fail(ErrorCode::slope_undefined, "infinite slope at a smoothed node");
    lhs += 0.5 * dh * dh * slope * slope;
  }
  const double rhs = 0.5 * std::exp(-2.0 * backend.lambda() * reg.h[i]) * speed_base * speed_base;
  return lhs - rhs;
}

double recovery_gap(const SpaceBackend& backend, const Curve& base, double eps) {
  if (!(eps >= 0.0)) fail(ErrorCode::domain_error, "eps must be >= 0");
  const auto mid = std::find(base.times().begin(), base.times().end(), 0.5);
  if (mid == base.times().end()) fail(ErrorCode::domain_error, "recovery_gap needs a node at t = 1/2");
  const double kin = kinetic_action(backend, base);
  if (eps == 0.0) return 0.0;
  const double e0 = backend.entropy(base.front());
  const double e1 = backend.entropy(base.back());
  if (!std::isfinite(e0) || !std::isfinite(e1))
    fail(ErrorCode::endpoint_entropy_infinite,
         "recovery bound needs finite endpoint entropies; mollify the endpoints first");
  const RegularizedCurve reg = build_regularized(backend, base, HatFunction::recovery(eps));
  const double lhs = kinetic_action(backend, reg.tilde) + eps * eps * fisher_action(backend, reg.tilde);
  const std::size_t imid = static_cast<std::size_t>(mid - base.times().begin());
  const double lambda_minus = std::max(-backend.lambda(), 0.0);
  const double rhs = std::exp(lambda_minus * eps) * kin - 2.0 * eps * reg.tilde_entropy[imid] +
                     eps * (e0 + e1);
  return rhs - lhs;
}

double convexity_certificate(const SpaceBackend& backend, const Point& x, const Point& y,
                             std::span<const double> thetas) {
  const double ex = backend.entropy(x);
  const double ey = backend.entropy(y);
  const double d = backend.distance(x, y);
  const double lambda = backend.lambda();
  double worst = -std::numeric_limits<double>::infinity();
  for (double th : thetas) {
    if (!(th >= 0.0 && th <= 1.0)) fail(ErrorCode::domain_error, "theta must lie in [0,1]");
    const Point g = th == 0.0 ? x : (th == 1.0 ? y : backend.geodesic(x, y, th));
    const double bound = (1.0 - th) * ex + th * ey - 0.5 * lambda * th * (1.0 - th) * d * d;
    worst = std::max(worst, backend.entropy(g) - bound);
  }
  return worst;
}

}  // namespace schro
