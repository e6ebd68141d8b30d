#include <algorithm>
#include <cmath>
#include <cstddef>

#include "schro/kernels.hpp"

namespace schro::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double weighted_sum_sq(std::span<const double> w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i] * x[i];
  return acc;
}

double pl_l2_sq(std::span<const double> du, std::span<const double> a,
                std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < du.size(); ++k) {
    const double d0 = a[k] - b[k];
    const double d1 = a[k + 1] - b[k + 1];
    acc += du[k] * (d0 * d0 + d0 * d1 + d1 * d1);
  }
  return acc / 3.0;
}

void pl_mass_apply(std::span<const double> du, std::span<const double> d,
                   std::span<double> out) {
  const std::size_t n = d.size();
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    if (j > 0) v += du[j - 1] * (d[j - 1] + 2.0 * d[j]);
    if (j + 1 < n) v += du[j] * (2.0 * d[j] + d[j + 1]);
    out[j] = v / 6.0;
  }
}

}  // namespace schro::kernels::scalar
