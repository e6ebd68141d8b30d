#include "schro/point.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "schro/errors.hpp"

namespace schro {

Grid Grid::over(double x_min, double x_max, std::size_t n, Boundary boundary) {
  if (n < 3) fail(ErrorCode::domain_error, "grid needs at least 3 cells");
  if (!(x_max > x_min)) fail(ErrorCode::domain_error, "grid needs x_max > x_min");
  return Grid{n, x_min, (x_max - x_min) / static_cast<double>(n), boundary};
}

void normalize_with_floor(std::span<double> rho, double dx, double floor) {
  for (double v : rho)
    if (!std::isfinite(v)) fail(ErrorCode::flow_diverged, "non-finite density value");
  const double target = 1.0 / dx;
  // Clamped cells stay at the floor; the rest absorb the normalization.
  // Repeats until no rescaled cell drops below the floor.
  std::vector<char> clamped(rho.size(), 0);
  for (int pass = 0; pass < 64; ++pass) {
    double free_sum = 0.0;
    double fixed_sum = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (clamped[i] || rho[i] <= floor) {
        clamped[i] = 1;
        rho[i] = floor;
        fixed_sum += floor;
      } else {
        free_sum += rho[i];
      }
    }
    if (free_sum <= 0.0) {
      fail(ErrorCode::domain_error, "density has no mass above the floor");
    }
    const double scale = (target - fixed_sum) / free_sum;
    if (!(scale > 0.0)) fail(ErrorCode::domain_error, "floor exceeds total mass");
    // already normalized up to rounding: keep the values bit-exact
    if (std::abs(scale - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return;
    bool dipped = false;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (clamped[i]) continue;
      rho[i] *= scale;
      if (rho[i] < floor) dipped = true;
    }
    if (!dipped) return;
  }
}

GridDensity::GridDensity(Grid grid, std::vector<double> rho, double floor)
    : grid_(grid), rho_(std::move(rho)) {
  if (rho_.size() != grid_.n)
    fail(ErrorCode::grid_mismatch, "density has " + std::to_string(rho_.size()) +
                                       " values for " + std::to_string(grid_.n) + " cells");
  if (!(grid_.dx > 0.0)) fail(ErrorCode::domain_error, "grid spacing must be positive");
  normalize_with_floor(rho_, grid_.dx, floor);
}

double GridDensity::mass() const {
  return std::accumulate(rho_.begin(), rho_.end(), 0.0) * grid_.dx;
}

Point::Point(Coords coords) : payload_(std::move(coords)) {
  for (double v : std::get<Coords>(payload_))
    if (!std::isfinite(v)) fail(ErrorCode::domain_error, "coordinates must be finite");
}

Point::Point(GridDensity density) : payload_(std::move(density)) {}

const Coords& Point::coords() const {
  if (!is_coords()) fail(ErrorCode::invalid_curve, "point holds a density, not coordinates");
  return std::get<Coords>(payload_);
}

const GridDensity& Point::density() const {
  if (!is_density()) fail(ErrorCode::invalid_curve, "point holds coordinates, not a density");
  return std::get<GridDensity>(payload_);
}

bool Point::same_space(const Point& other) const {
  if (is_coords() && other.is_coords()) return coords().size() == other.coords().size();
  if (is_density() && other.is_density()) return density().grid() == other.density().grid();
  return false;
}

}  // namespace schro
