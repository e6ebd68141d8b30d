#pragma once

#include <optional>
#include <span>
#include <vector>

#include "schro/backend.hpp"
#include "schro/curve.hpp"
#include "schro/hat.hpp"

namespace schro {

/// A base curve pushed along the flow by a node-dependent time:
/// tilde_i = S_{h_i} base_i. Entropy and slope of every tilde node are
/// cached since the certificates below read them repeatedly.
struct RegularizedCurve {
  Curve base;
  std::vector<double> h;
  // Set when h came from a hat profile; its peak is the one node where h'
  // does not exist.
  std::optional<HatFunction> hat;
  Curve tilde;
  std::vector<double> tilde_entropy;
  std::vector<double> tilde_slope;  // may contain +inf where h_i = 0
};

RegularizedCurve build_regularized(const SpaceBackend& backend, const Curve& base,
                                   const HatFunction& h);

/// Explicit per-node times, h_i >= 0 (positive endpoint values allowed).
RegularizedCurve build_regularized(const SpaceBackend& backend, const Curve& base,
                                   std::span<const double> h);

/// LHS - RHS of the exact two-point estimate between nodes i < j: the
/// squared speed of tilde, the slope at the more-smoothed node times the
/// exponential height factor, and the entropy increment against the
/// contracted squared speed of the base. Uses series limits for |lambda| <
/// 1e-8. Empty when the slope at that node is infinite while h_i != h_j.
std::optional<double> discrete_estimate_residual(const SpaceBackend& backend,
                                                 const RegularizedCurve& reg, std::size_t i,
                                                 std::size_t j);

/// Worst residual over all node pairs (non-applicable pairs skipped).
struct PairSweep {
  double worst = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};
PairSweep discrete_estimate_sweep(const SpaceBackend& backend, const RegularizedCurve& reg,
                                  bool adjacent_only = false);

/// LHS - RHS of the pointwise differential estimate at interior node i,
/// with speeds, h' and dE/dt by central differences. Throws NotApplicable
/// at the peak of a hat profile.
double pointwise_estimate_residual(const SpaceBackend& backend, const RegularizedCurve& reg,
                                   std::size_t i);

/// RHS - LHS of the integrated recovery bound for h_eps = eps min(t, 1-t).
/// Both actions use the core functionals on base's grid, which must have a
/// node at t = 1/2. Throws EndpointEntropyInfinite for eps > 0 if an
/// endpoint has infinite entropy.
double recovery_gap(const SpaceBackend& backend, const Curve& base, double eps);

/// Worst violation over theta of lambda-convexity of E along the geodesic
/// from x to y.
double convexity_certificate(const SpaceBackend& backend, const Point& x, const Point& y,
                             std::span<const double> thetas);

/// n equispaced values 0, 1/(n-1), ..., 1.
std::vector<double> unit_grid(std::size_t n);

/// Node i of a backend geodesic on a uniform grid with `intervals` steps.
Curve geodesic_curve(const SpaceBackend& backend, const Point& x, const Point& y,
                     std::size_t intervals);

}  // namespace schro
