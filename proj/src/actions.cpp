#include "schro/actions.hpp"

#include <cmath>

#include "schro/errors.hpp"

namespace schro {

void check_curve(const SpaceBackend& backend, const Curve& curve) {
  for (const auto& p : curve.points())
    if (!backend.accepts(p))
      fail(ErrorCode::invalid_curve, "curve point does not belong to backend " + backend.name());
}

double kinetic_action(const SpaceBackend& backend, const Curve& curve) {
  check_curve(backend, curve);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double d = backend.distance(curve[i], curve[i + 1]);
    total += d * d / (curve.time(i + 1) - curve.time(i));
  }
  return 0.5 * total;
}

FisherAction fisher_action_detailed(const SpaceBackend& backend, const Curve& curve) {
  check_curve(backend, curve);
  FisherAction out;
  const std::size_t last = curve.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    double w = 0.0;
    if (i > 0) w += 0.5 * (curve.time(i) - curve.time(i - 1));
    if (i < last) w += 0.5 * (curve.time(i + 1) - curve.time(i));
    const double s = backend.slope(curve[i]);
    if (std::isnan(s)) fail(ErrorCode::slope_undefined, "slope evaluated to NaN");
    if (std::isinf(s)) {
      if (i == 0 || i == last) {
        out.dropped_endpoint = true;
        continue;
      }
      fail(ErrorCode::slope_undefined, "infinite slope at an interior node");
    }
    out.value += w * 0.5 * s * s;
  }
  return out;
}

double fisher_action(const SpaceBackend& backend, const Curve& curve) {
  return fisher_action_detailed(backend, curve).value;
}

double schrodinger_action(const SpaceBackend& backend, const Curve& curve, double eps) {
  if (!(eps >= 0.0)) fail(ErrorCode::domain_error, "eps must be >= 0");
  const double kinetic = kinetic_action(backend, curve);
  if (eps == 0.0) return kinetic;
  return kinetic + eps * eps * fisher_action(backend, curve);
}

}  // namespace schro
