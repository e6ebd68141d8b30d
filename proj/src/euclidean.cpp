#include "schro/euclidean.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "schro/errors.hpp"

namespace schro {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Classical RK4 for x' = -grad V(x) with `steps` equal steps over [0, s].
Coords rk4(const Potential& v, Coords x, double s, std::size_t steps) {
  const double h = s / static_cast<double>(steps);
  const std::size_t d = x.size();
  Coords tmp(d);
  for (std::size_t n = 0; n < steps; ++n) {
    const Coords k1 = v.gradient(x);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] - 0.5 * h * k1[i];
    const Coords k2 = v.gradient(tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] - 0.5 * h * k2[i];
    const Coords k3 = v.gradient(tmp);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] - h * k3[i];
    const Coords k4 = v.gradient(tmp);
    for (std::size_t i = 0; i < d; ++i)
      x[i] -= h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(x)) fail(ErrorCode::flow_diverged, "RK4 produced a non-finite state");
  }
  return x;
}

}  // namespace

Potential Potential::quadratic(Coords center, double strength) {
  if (center.empty()) fail(ErrorCode::domain_error, "potential dimension must be >= 1");
  if (!(strength > 0.0)) fail(ErrorCode::domain_error, "quadratic strength must be > 0");
  Potential p;
  p.quadratic_ = true;
  p.dim_ = center.size();
  p.lambda_ = strength;
  p.center_ = std::move(center);
  return p;
}

Potential Potential::user(std::size_t dim, Value value, Gradient gradient, double lambda,
                          HessianVector hessian) {
  if (dim == 0) fail(ErrorCode::domain_error, "potential dimension must be >= 1");
  if (!value || !gradient) fail(ErrorCode::domain_error, "user potential needs V and grad V");
  Potential p;
  p.dim_ = dim;
  p.lambda_ = lambda;
  p.value_ = std::move(value);
  p.gradient_ = std::move(gradient);
  p.hessian_ = std::move(hessian);
  return p;
}

double Potential::value(std::span<const double> x) const {
  if (quadratic_) return 0.5 * lambda_ * distance_sq(x, center_);
  return value_(x);
}

Coords Potential::gradient(std::span<const double> x) const {
  Coords g(dim_);
  if (quadratic_) {
    for (std::size_t i = 0; i < dim_; ++i) g[i] = lambda_ * (x[i] - center_[i]);
  } else {
    gradient_(x, g);
  }
  return g;
}

Coords Potential::hessian_vector(std::span<const double> x, std::span<const double> v) const {
  Coords out(dim_);
  if (quadratic_) {
    for (std::size_t i = 0; i < dim_; ++i) out[i] = lambda_ * v[i];
    return out;
  }
  if (hessian_) {
    hessian_(x, v, out);
    return out;
  }
  const double vn = norm(v);
  if (vn == 0.0) return out;
  const double h = 1e-5 * std::max(1.0, norm(x)) / vn;
  Coords xp(x.begin(), x.end());
  Coords xm(x.begin(), x.end());
  for (std::size_t i = 0; i < dim_; ++i) {
    xp[i] += h * v[i];
    xm[i] -= h * v[i];
  }
  const Coords gp = gradient(xp);
  const Coords gm = gradient(xm);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = (gp[i] - gm[i]) / (2.0 * h);
  return out;
}

PotentialDiagnostics diagnose(const Potential& potential, std::span<const Coords> samples) {
  PotentialDiagnostics diag;
  diag.min_hessian_quotient = std::numeric_limits<double>::infinity();
  for (const auto& x : samples) {
    const Coords g = potential.gradient(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
      Coords xp = x;
      Coords xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (potential.value(xp) - potential.value(xm)) / (2.0 * h);
      diag.gradient_rel_error =
          std::max(diag.gradient_rel_error, std::abs(g[k] - fd) / std::max(1.0, std::abs(g[k])));
    }
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto& x = samples[i];
    const auto& y = samples[i + 1];
    const double d2 = distance_sq(x, y);
    if (d2 == 0.0) continue;
    const Coords gx = potential.gradient(x);
    const Coords gy = potential.gradient(y);
    double ip = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) ip += (gx[k] - gy[k]) * (x[k] - y[k]);
    diag.min_hessian_quotient = std::min(diag.min_hessian_quotient, ip / d2);
  }
  if (diag.gradient_rel_error > 1e-4)
    diag.warnings.push_back("gradient disagrees with finite differences (rel. error " +
                            std::to_string(diag.gradient_rel_error) + ")");
  if (diag.min_hessian_quotient < potential.lambda() - 1e-6)
    diag.warnings.push_back("sampled Hessian quotient " +
                            std::to_string(diag.min_hessian_quotient) +
                            " is below the declared lambda " + std::to_string(potential.lambda()));
  return diag;
}

EuclideanBackend::EuclideanBackend(Potential potential) : potential_(std::move(potential)) {}

bool EuclideanBackend::accepts(const Point& p) const {
  return p.is_coords() && p.coords().size() == potential_.dim();
}

double EuclideanBackend::distance(const Point& a, const Point& b) const {
  return std::sqrt(distance_sq(a.coords(), b.coords()));
}

Point EuclideanBackend::geodesic(const Point& a, const Point& b, double theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) fail(ErrorCode::domain_error, "theta outside [0,1]");
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  const auto& x = a.coords();
  const auto& y = b.coords();
  Coords z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (1.0 - theta) * x[i] + theta * y[i];
  return Point(std::move(z));
}

double EuclideanBackend::entropy(const Point& p) const { return potential_.value(p.coords()); }

double EuclideanBackend::slope(const Point& p) const {
  return norm(potential_.gradient(p.coords()));
}

Point EuclideanBackend::flow(const Point& p, double s) const {
  if (!(s >= 0.0)) fail(ErrorCode::domain_error, "flow time must be >= 0");
  if (s == 0.0) return p;
  const auto& x = p.coords();
  if (potential_.is_quadratic()) {
    const double decay = std::exp(-potential_.lambda() * s);
    const auto& c = potential_.center();
    Coords y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = c[i] + decay * (x[i] - c[i]);
    return Point(std::move(y));
  }
  // Step doubling until the refined answer moves by less than 1e-9 relative.
  std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(s / 0.05)));
  Coords coarse = rk4(potential_, x, s, steps);
  for (int level = 0; level < 24; ++level) {
    steps *= 2;
    Coords fine = rk4(potential_, x, s, steps);
    const double change = std::sqrt(distance_sq(fine, coarse));
    if (change <= 1e-9 * std::max(1.0, norm(fine))) return Point(std::move(fine));
    coarse = std::move(fine);
  }
  fail(ErrorCode::flow_diverged, "RK4 step control did not converge");
}

double EuclideanBackend::slope_global_check(const Point& x, std::span<const Point> samples) const {
  if (samples.empty()) fail(ErrorCode::domain_error, "slope_global_check needs samples");
  const double vx = entropy(x);
  double best = 0.0;
  for (const auto& y : samples) {
    const double d = distance(x, y);
    if (d == 0.0) fail(ErrorCode::domain_error, "sample coincides with x");
    const double q = (vx - entropy(y)) / d + 0.5 * lambda() * d;
    best = std::max(best, q);
  }
  return best;
}

}  // namespace schro
