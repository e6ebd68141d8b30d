#include "schro/curve.hpp"

#include <string>

#include "schro/errors.hpp"

namespace schro {

std::vector<double> uniform_times(std::size_t intervals) {
  if (intervals == 0) fail(ErrorCode::invalid_curve, "a curve needs at least one interval");
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    t[i] = static_cast<double>(i) / static_cast<double>(intervals);
  t.back() = 1.0;
  return t;
}

Curve::Curve(std::vector<double> times, std::vector<Point> points)
    : times_(std::move(times)), points_(std::move(points)) {
  if (points_.size() < 2) fail(ErrorCode::invalid_curve, "a curve needs at least two points");
  if (times_.size() != points_.size())
    fail(ErrorCode::invalid_curve, std::to_string(times_.size()) + " times for " +
                                       std::to_string(points_.size()) + " points");
  if (times_.front() != 0.0 || times_.back() != 1.0)
    fail(ErrorCode::invalid_curve, "time grid must start at 0 and end at 1");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      fail(ErrorCode::invalid_curve, "time grid must be strictly increasing");
  for (const auto& p : points_)
    if (!p.same_space(points_.front()))
      fail(ErrorCode::invalid_curve, "curve points live in different state spaces");
}

Curve Curve::uniform(std::vector<Point> points) {
  auto t = uniform_times(points.size() - 1);
  return Curve(std::move(t), std::move(points));
}

}  // namespace schro
