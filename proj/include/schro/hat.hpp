#pragma once

namespace schro {

/// Piecewise-linear bump eps * H_theta(t): zero at t = 0 and t = 1, eps at
/// t = theta.
class HatFunction {
 public:
  HatFunction(double eps, double theta);

  /// The recovery profile eps * min(t, 1 - t), i.e. height eps/2 at 1/2.
  static HatFunction recovery(double eps) { return HatFunction(0.5 * eps, 0.5); }

  double eps() const { return eps_; }
  double theta() const { return theta_; }

  double operator()(double t) const;

  /// One-sided derivative on the side of t that lies in [0, theta) or
  /// (theta, 1]; at t = theta the right derivative is returned.
  double derivative(double t) const;

 private:
  double eps_;
  double theta_;
};

}  // namespace schro
