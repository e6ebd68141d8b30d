#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "schro/backend.hpp"

namespace schro {

/// A lambda-convex potential V on R^d.
class Potential {
 public:
  using Value = std::function<double(std::span<const double>)>;
  using Gradient = std::function<void(std::span<const double>, std::span<double>)>;
  /// out = Hess V(x) v
  using HessianVector =
      std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;

  /// V(x) = strength/2 |x - center|^2; lambda = strength.
  static Potential quadratic(Coords center, double strength);

  /// Callback potential with a declared convexity modulus. Without a Hessian
  /// callback, Hessian-vector products use central differences of the
  /// gradient.
  static Potential user(std::size_t dim, Value value, Gradient gradient, double lambda,
                        HessianVector hessian = {});

  bool is_quadratic() const { return quadratic_; }
  std::size_t dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Coords& center() const { return center_; }

  double value(std::span<const double> x) const;
  Coords gradient(std::span<const double> x) const;
  Coords hessian_vector(std::span<const double> x, std::span<const double> v) const;

 private:
  Potential() = default;

  bool quadratic_ = false;
  std::size_t dim_ = 0;
  double lambda_ = 0.0;
  Coords center_;
  Value value_;
  Gradient gradient_;
  HessianVector hessian_;
};

struct PotentialDiagnostics {
  // max over samples and axes of |dV/dx_k - central difference| / max(1, |dV/dx_k|)
  double gradient_rel_error = 0.0;
  // min over sampled pairs of <grad V(x) - grad V(y), x - y> / |x - y|^2
  double min_hessian_quotient = 0.0;
  std::vector<std::string> warnings;
};

/// Finite-difference gradient check plus a convexity sanity check of the
/// declared lambda. Never throws for a violated lambda; it only warns.
PotentialDiagnostics diagnose(const Potential& potential, std::span<const Coords> samples);

/// X = R^d with E = V. Geodesics are segments and S_t solves x' = -grad V(x).
class EuclideanBackend final : public SpaceBackend {
 public:
  explicit EuclideanBackend(Potential potential);

  std::string name() const override { return "euclidean"; }
  double lambda() const override { return potential_.lambda(); }
  bool accepts(const Point& p) const override;
  double distance(const Point& a, const Point& b) const override;
  Point geodesic(const Point& a, const Point& b, double theta) const override;
  double entropy(const Point& p) const override;
  double slope(const Point& p) const override;
  Point flow(const Point& p, double s) const override;

  const Potential& potential() const { return potential_; }

  /// sup over samples y of ((V(x) - V(y)) / d(x,y) + lambda/2 d(x,y))^+.
  /// Never exceeds slope(x) for a lambda-convex V.
  double slope_global_check(const Point& x, std::span<const Point> samples) const;

 private:
  Potential potential_;
};

}  // namespace schro
