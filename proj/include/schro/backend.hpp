#pragma once

#include <string>

#include "schro/point.hpp"

namespace schro {

/// A metric space with an entropy and its EVI_lambda gradient flow.
///
/// Implementations are immutable after construction and every method is
/// safe to call concurrently.
class SpaceBackend {
 public:
  virtual ~SpaceBackend() = default;

  virtual std::string name() const = 0;

  /// Contraction parameter of the flow.
  virtual double lambda() const = 0;

  /// Whether `p` lives in this backend's state space.
  virtual bool accepts(const Point& p) const = 0;

  virtual double distance(const Point& a, const Point& b) const = 0;

  /// Constant-speed geodesic from `a` (theta = 0) to `b` (theta = 1).
  virtual Point geodesic(const Point& a, const Point& b, double theta) const = 0;

  virtual double entropy(const Point& p) const = 0;

  /// Metric slope of the entropy; may be +inf.
  virtual double slope(const Point& p) const = 0;

  /// Gradient flow semigroup S_s applied to `p`; S_0 is the identity.
  virtual Point flow(const Point& p, double s) const = 0;
};

}  // namespace schro
