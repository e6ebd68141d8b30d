#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace schro {

inline constexpr double kDensityFloor = 1e-12;

enum class Boundary { periodic, no_flux };

/// Uniform 1D cell grid on [x_min, x_min + n*dx].
struct Grid {
  std::size_t n = 0;
  double x_min = 0.0;
  double dx = 0.0;
  Boundary boundary = Boundary::no_flux;

  static Grid over(double x_min, double x_max, std::size_t n, Boundary boundary);

  double length() const { return static_cast<double>(n) * dx; }
  double x_max() const { return x_min + length(); }
  double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx; }
  double edge(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }

  bool operator==(const Grid&) const = default;
};

/// Probability density, piecewise constant on the cells of a Grid.
///
/// Every constructor clamps to the floor and renormalizes so that
/// sum(rho)*dx == 1 and rho >= floor hold on exit.
class GridDensity {
 public:
  GridDensity(Grid grid, std::vector<double> rho, double floor = kDensityFloor);

  const Grid& grid() const { return grid_; }
  std::span<const double> rho() const { return rho_; }
  double operator[](std::size_t i) const { return rho_[i]; }
  std::size_t size() const { return rho_.size(); }
  double mass() const;

  bool operator==(const GridDensity&) const = default;

 private:
  Grid grid_;
  std::vector<double> rho_;
};

/// Clamp to `floor` and rescale the unclamped cells so the total mass is one.
void normalize_with_floor(std::span<double> rho, double dx, double floor = kDensityFloor);

using Coords = std::vector<double>;

/// A state: a coordinate vector or a grid density.
class Point {
 public:
  Point(Coords coords);
  Point(GridDensity density);

  bool is_coords() const { return std::holds_alternative<Coords>(payload_); }
  bool is_density() const { return std::holds_alternative<GridDensity>(payload_); }

  const Coords& coords() const;
  const GridDensity& density() const;

  /// Same payload kind and shape (dimension, or grid).
  bool same_space(const Point& other) const;

  bool operator==(const Point&) const = default;

 private:
  std::variant<Coords, GridDensity> payload_;
};

}  // namespace schro
