#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "schro/point.hpp"

namespace schro {

/// Grid 0 = t_0 < t_1 < ... < t_N = 1 with N equal intervals.
std::vector<double> uniform_times(std::size_t intervals);

/// Discrete curve: strictly increasing times on [0,1] plus one Point per node.
class Curve {
 public:
  Curve(std::vector<double> times, std::vector<Point> points);

  /// Points on a uniform grid.
  static Curve uniform(std::vector<Point> points);

  std::span<const double> times() const { return times_; }
  std::span<const Point> points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  double time(std::size_t i) const { return times_[i]; }

  std::size_t size() const { return points_.size(); }
  std::size_t intervals() const { return points_.size() - 1; }
  const Point& front() const { return points_.front(); }
  const Point& back() const { return points_.back(); }

 private:
  std::vector<double> times_;
  std::vector<Point> points_;
};

}  // namespace schro
