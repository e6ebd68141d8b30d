#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "schro/backend.hpp"

namespace schro {

/// Internal energy E(rho) = int U(rho) dx.
class EntropyKind {
 public:
  enum class Type { boltzmann, porous_medium };

  /// U(r) = r log r
  static EntropyKind boltzmann() { return EntropyKind(Type::boltzmann, 1.0); }
  /// U(r) = r^m / (m - 1), m > 1
  static EntropyKind porous_medium(double m);

  Type type() const { return type_; }
  double exponent() const { return m_; }
  std::string name() const;

  double energy_density(double r) const;
  /// U'(r); the Boltzmann constant shift (+1) is dropped since only
  /// differences of U' enter the slope.
  double pressure(double r) const;
  /// r * U''(r), i.e. d U'(r) / d log r.
  double pressure_log_derivative(double r) const;
  /// f with f'(r) = sqrt(r) U''(r), so that |d U'(rho)|^2 rho = |d f(rho)|^2:
  /// 2 sqrt(r) (Boltzmann), m / (m - 1/2) r^(m - 1/2) (porous medium).
  double fisher_root(double r) const;

 private:
  EntropyKind(Type type, double m) : type_(type), m_(m) {}
  Type type_;
  double m_;
};

/// Piecewise-linear quantile (inverse CDF): knots (u_k, x_k) with u_0 = 0,
/// u_K = 1 and both sequences non-decreasing.
struct Quantile {
  std::vector<double> u;
  std::vector<double> x;

  /// Value at level `v`; levels outside [0,1] clamp to the end knots.
  double operator()(double v) const;
};

/// Exact quantile of a cell-wise constant density: knots at the cell edges.
Quantile quantile_of(const GridDensity& density);

/// Cell-average re-binning of the measure whose quantile has knots (u, x).
/// Periodic grids wrap positions modulo the domain length.
GridDensity deposit(const Grid& grid, std::span<const double> u, std::span<const double> x);

struct DensityFlowOptions {
  // Substeps are at most substep_factor * dx^2 (heat) or
  // substep_factor * dx^2 / (m max rho^(m-1)) (porous medium).
  double substep_factor = 0.5;
};

/// Probability densities on a 1D grid with the quadratic Wasserstein
/// distance; E is Boltzmann or porous-medium internal energy and S_t the
/// matching heat / porous-medium flow. lambda = 0.
class DensityBackend final : public SpaceBackend {
 public:
  DensityBackend(Grid grid, EntropyKind kind, DensityFlowOptions options = {});

  std::string name() const override { return "density1d"; }
  double lambda() const override { return 0.0; }
  bool accepts(const Point& p) const override;
  double distance(const Point& a, const Point& b) const override;
  Point geodesic(const Point& a, const Point& b, double theta) const override;
  double entropy(const Point& p) const override;
  double slope(const Point& p) const override;
  Point flow(const Point& p, double s) const override;

  const Grid& grid() const { return grid_; }
  const EntropyKind& kind() const { return kind_; }

  double w2_distance(const GridDensity& a, const GridDensity& b) const;
  GridDensity w2_geodesic(const GridDensity& a, const GridDensity& b, double theta) const;
  double entropy(const GridDensity& rho) const;
  double slope(const GridDensity& rho) const;
  GridDensity flow(const GridDensity& rho, double s) const;

  /// Optimal rotation of b's lifted quantile against a's (periodic grids).
  double periodic_shift(const GridDensity& a, const GridDensity& b) const;

 private:
  void check_grid(const GridDensity& rho) const;
  void substep(std::vector<double>& rho, double ds) const;

  Grid grid_;
  EntropyKind kind_;
  DensityFlowOptions options_;
};

// Initial-data presets. All are point-sampled at cell centers and then
// normalized; on periodic grids Gaussians are wrapped.
GridDensity sample_density(const Grid& grid, const std::function<double(double)>& f);
GridDensity gaussian(const Grid& grid, double mean, double sigma);
GridDensity gaussian_mixture(const Grid& grid, std::span<const double> weights,
                             std::span<const double> means, std::span<const double> sigmas);
/// All mass in the cell containing x0 (the rest at the floor).
GridDensity near_dirac(const Grid& grid, double x0);
GridDensity uniform_density(const Grid& grid);

/// sum |a_i - b_i| dx
double l1_distance(const GridDensity& a, const GridDensity& b);

}  // namespace schro
