#include "schro/hat.hpp"

#include "schro/errors.hpp"

namespace schro {

HatFunction::HatFunction(double eps, double theta) : eps_(eps), theta_(theta) {
  if (!(eps >= 0.0)) fail(ErrorCode::domain_error, "hat height must be >= 0");
  if (!(theta > 0.0 && theta < 1.0)) fail(ErrorCode::domain_error, "hat peak must lie in (0,1)");
}

double HatFunction::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::domain_error, "hat evaluated outside [0,1]");
  if (t <= theta_) return eps_ * t / theta_;
  return eps_ * (1.0 - t) / (1.0 - theta_);
}

double HatFunction::derivative(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::domain_error, "hat evaluated outside [0,1]");
  return t < theta_ ? eps_ / theta_ : -eps_ / (1.0 - theta_);
}

}  // namespace schro
