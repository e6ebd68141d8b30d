#pragma once

// Thomas algorithm and its cyclic (Sherman-Morrison) variant.

#include <cstddef>
#include <vector>

namespace schro::detail {

/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]. In the
/// cyclic form lower[0] couples to x[n-1] and upper[n-1] to x[0].
struct Tridiagonal {
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::vector<double> lower, diag, upper;
};

inline std::vector<double> solve(Tridiagonal sys, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> c(n);
  c[0] = sys.upper[0] / sys.diag[0];
  rhs[0] /= sys.diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = sys.diag[i] - sys.lower[i] * c[i - 1];
    c[i] = sys.upper[i] / m;
    rhs[i] = (rhs[i] - sys.lower[i] * rhs[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

inline std::vector<double> solve_cyclic(Tridiagonal sys, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  const double alpha = sys.upper[n - 1];
  const double beta = sys.lower[0];
  const double gamma = -sys.diag[0];
  sys.diag[0] -= gamma;
  sys.diag[n - 1] -= alpha * beta / gamma;
  sys.lower[0] = 0.0;
  sys.upper[n - 1] = 0.0;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> x = solve(sys, std::move(rhs));
  const std::vector<double> z = solve(std::move(sys), std::move(u));
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
  return out;
}

}  // namespace schro::detail
