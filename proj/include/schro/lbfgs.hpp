#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace schro {

struct LbfgsOptions {
  std::size_t max_iter = 2000;
  double grad_tol = 1e-7;
  std::size_t memory = 10;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  std::size_t max_backtracks = 60;
};

/// Value and gradient at x. Returning a non-finite value marks x infeasible;
/// the line search then backtracks.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Applies an approximate inverse Hessian (used as the L-BFGS seed matrix).
using Preconditioner = std::function<void(std::span<const double> in, std::span<double> out)>;

struct LbfgsReport {
  std::vector<double> x;
  double value = 0.0;
  // max-norm of the gradient at x
  double stationarity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Objective value after each accepted step, starting with f(x0).
  std::vector<double> history;
};

/// Limited-memory BFGS with backtracking Armijo line search. Falls back to
/// (preconditioned) steepest descent whenever the quasi-Newton direction is
/// not a descent direction or its line search fails. Returns the best iterate.
LbfgsReport minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                           const LbfgsOptions& options, const Preconditioner& precondition = {});

}  // namespace schro
