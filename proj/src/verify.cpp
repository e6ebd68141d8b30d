#include "schro/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "schro/errors.hpp"

namespace schro {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_grid(std::span<const double> grid, bool allow_zero) {
  if (grid.empty()) fail(ErrorCode::domain_error, "empty time grid");
  double prev = kNegInf;
  for (double s : grid) {
    if (!std::isfinite(s) || s < 0.0 || (!allow_zero && s == 0.0))
      fail(ErrorCode::domain_error, "time grid values must be positive and finite");
    if (!(s > prev)) fail(ErrorCode::domain_error, "time grid must be increasing");
    prev = s;
  }
}

EviReport finish(std::string property, double worst, std::size_t samples, std::size_t skipped,
                 double tolerance) {
  EviReport r;
  r.property = std::move(property);
  r.worst_residual = samples == 0 ? 0.0 : worst;
  r.samples = samples;
  r.skipped = skipped;
  r.tolerance = tolerance;
  r.pass = r.worst_residual <= tolerance;
  return r;
}

// int_0^t e^{lambda s} ds
double i_lambda(double lambda, double t) {
  if (std::abs(lambda * t) < 1e-8) return t * (1.0 + 0.5 * lambda * t);
  return std::expm1(lambda * t) / lambda;
}

}  // namespace

EviReport evi_defect(const SpaceBackend& backend, const Point& x, const Point& y,
                     std::span<const double> s_grid, double tolerance) {
  check_grid(s_grid, false);
  const double ey = backend.entropy(y);
  if (!std::isfinite(ey)) fail(ErrorCode::domain_error, "EVI reference point needs finite entropy");
  const double lambda = backend.lambda();
  double worst = kNegInf;
  for (double s : s_grid) {
    const double delta = std::min(1e-3, s / 10.0);
    const Point before = backend.flow(x, s - delta);
    const Point mid = backend.flow(before, delta);
    const Point after = backend.flow(mid, delta);
    const double d_before = backend.distance(before, y);
    const double d_after = backend.distance(after, y);
    const double d_mid = backend.distance(mid, y);
    const double deriv = (d_after * d_after - d_before * d_before) / (2.0 * delta);
    const double defect = 0.5 * deriv + 0.5 * lambda * d_mid * d_mid + backend.entropy(mid) - ey;
    worst = std::max(worst, defect);
  }
  return finish("evi", worst, s_grid.size(), 0, tolerance);
}

EviReport contraction_report(const SpaceBackend& backend,
                             std::span<const std::pair<Point, Point>> pairs,
                             std::span<const double> s_grid, double tolerance) {
  check_grid(s_grid, true);
  const double lambda = backend.lambda();
  double worst = kNegInf;
  std::size_t samples = 0;
  for (const auto& [a, b] : pairs) {
    const double d0 = backend.distance(a, b);
    Point fa = a;
    Point fb = b;
    double at = 0.0;
    for (double s : s_grid) {
      // march both flows along the grid; the semigroup property makes this exact
      if (s > at) {
        fa = backend.flow(fa, s - at);
        fb = backend.flow(fb, s - at);
        at = s;
      }
      worst = std::max(worst, backend.distance(fa, fb) - std::exp(-lambda * s) * d0);
      ++samples;
    }
  }
  return finish("contraction", worst, samples, 0, tolerance);
}

EviReport ede_report(const SpaceBackend& backend, const Point& x, double T, double tolerance,
                     std::size_t intervals) {
  if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorCode::domain_error, "EDE horizon must be positive");
  if (intervals < 2 || intervals % 2 != 0) fail(ErrorCode::domain_error, "Simpson needs an even interval count");
  const double e0 = backend.entropy(x);
  if (!std::isfinite(e0)) fail(ErrorCode::domain_error, "EDE start needs finite entropy");
  const double h = T / static_cast<double>(intervals);
  Point p = x;
  double integral = 0.0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    if (k > 0) p = backend.flow(p, h);
    const double sl = backend.slope(p);
    if (!std::isfinite(sl)) fail(ErrorCode::slope_undefined, "EDE needs a finite slope along the flow");
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    integral += w * sl * sl;
  }
  integral *= h / 3.0;
  const double drop = e0 - backend.entropy(p);
  const double residual = std::abs(drop - integral) / std::max(1.0, std::abs(drop));
  return finish("ede", residual, intervals + 1, 0, tolerance);
}

EviReport regularization_report(const SpaceBackend& backend, const Point& x, const Point& y,
                                std::span<const double> t_grid, double tolerance) {
  check_grid(t_grid, false);
  const double lambda = backend.lambda();
  const double slope_y = backend.slope(y);
  if (!std::isfinite(slope_y)) fail(ErrorCode::slope_undefined, "reference point needs a finite slope");
  const double d = backend.distance(x, y);
  double worst = kNegInf;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  Point p = x;
  double at = 0.0;
  for (double t : t_grid) {
    p = backend.flow(p, t - at);
    at = t;
    if (-lambda * t >= std::log(2.0)) {
      ++skipped;
      continue;
    }
    const double il = i_lambda(lambda, t);
    const double bound = slope_y * slope_y / (2.0 * std::exp(lambda * t) - 1.0) + d * d / (il * il);
    const double sl = backend.slope(p);
    worst = std::max(worst, sl * sl - bound);
    ++samples;
  }
  return finish("regularization", worst, samples, skipped, tolerance);
}

EviReport slope_monotonicity_report(const SpaceBackend& backend, const Point& x,
                                    std::span<const double> s_grid, double tolerance) {
  check_grid(s_grid, true);
  if (s_grid.size() < 2) fail(ErrorCode::domain_error, "monotonicity needs two grid times");
  const double lambda = backend.lambda();
  Point p = backend.flow(x, s_grid[0]);
  double prev = std::exp(lambda * s_grid[0]) * backend.slope(p);
  double worst = kNegInf;
  for (std::size_t k = 1; k < s_grid.size(); ++k) {
    p = backend.flow(p, s_grid[k] - s_grid[k - 1]);
    const double cur = std::exp(lambda * s_grid[k]) * backend.slope(p);
    // inf followed by inf carries no information
    if (!(std::isinf(prev) && std::isinf(cur))) worst = std::max(worst, cur - prev);
    prev = cur;
  }
  return finish("slope_monotonicity", worst, s_grid.size() - 1, 0, tolerance);
}

EviReport local_global_report(const SpaceBackend& backend, const Point& x,
                              std::span<const Point> samples, double tolerance) {
  const double ex = backend.entropy(x);
  if (!std::isfinite(ex)) fail(ErrorCode::domain_error, "local/global check needs finite E(x)");
  const double lambda = backend.lambda();
  double sup = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  for (const Point& y : samples) {
    const double d = backend.distance(x, y);
    const double ey = backend.entropy(y);
    if (d == 0.0 || !std::isfinite(ey)) {
      ++skipped;
      continue;
    }
    sup = std::max(sup, (ex - ey) / d + 0.5 * lambda * d);
    ++used;
  }
  const double residual = sup - backend.slope(x);
  return finish("local_global", residual, used, skipped, tolerance);
}

}  // namespace schro
