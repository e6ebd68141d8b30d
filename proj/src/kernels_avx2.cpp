// Built with -mavx2 -mfma; only reached through the dispatcher after a CPU
// check, so nothing here may run at static-init time.

#include <cmath>
#include <cstddef>

#include "schro/errors.hpp"
#include "schro/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace schro::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i + 4]), _mm256_loadu_pd(&b[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    _mm256_storeu_pd(&y[i], r);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs(std::span<const double> x) {
  const std::size_t n = x.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(&x[i])));
  double r = hmax(m);
  for (; i < n; ++i) r = std::fmax(r, std::abs(x[i]));
  return r;
}

double weighted_sum_sq(std::span<const double> w, std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(&x[i]);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(&w[i]), xv), xv, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += w[i] * x[i] * x[i];
  return r;
}

double pl_l2_sq(std::span<const double> du, std::span<const double> a,
                std::span<const double> b) {
  const std::size_t n = du.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(&a[k]), _mm256_loadu_pd(&b[k]));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(&a[k + 1]), _mm256_loadu_pd(&b[k + 1]));
    __m256d q = _mm256_mul_pd(d0, d0);
    q = _mm256_fmadd_pd(d0, d1, q);
    q = _mm256_fmadd_pd(d1, d1, q);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(&du[k]), q, acc);
  }
  double r = hsum(acc);
  for (; k < n; ++k) {
    const double d0 = a[k] - b[k];
    const double d1 = a[k + 1] - b[k + 1];
    r += du[k] * (d0 * d0 + d0 * d1 + d1 * d1);
  }
  return r / 3.0;
}

void pl_mass_apply(std::span<const double> du, std::span<const double> d,
                   std::span<double> out) {
  const std::size_t n = d.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = 0.0;
    return;
  }
  out[0] = du[0] * (2.0 * d[0] + d[1]) / 6.0;
  out[n - 1] = du[n - 2] * (d[n - 2] + 2.0 * d[n - 1]) / 6.0;
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sixth = _mm256_set1_pd(1.0 / 6.0);
  std::size_t j = 1;
  for (; j + 4 <= n - 1; j += 4) {
    const __m256d dm = _mm256_loadu_pd(&d[j - 1]);
    const __m256d dc = _mm256_loadu_pd(&d[j]);
    const __m256d dp = _mm256_loadu_pd(&d[j + 1]);
    const __m256d left = _mm256_mul_pd(_mm256_loadu_pd(&du[j - 1]), _mm256_fmadd_pd(two, dc, dm));
    const __m256d right = _mm256_mul_pd(_mm256_loadu_pd(&du[j]), _mm256_fmadd_pd(two, dc, dp));
    _mm256_storeu_pd(&out[j], _mm256_mul_pd(_mm256_add_pd(left, right), sixth));
  }
  for (; j < n - 1; ++j)
    out[j] = (du[j - 1] * (d[j - 1] + 2.0 * d[j]) + du[j] * (2.0 * d[j] + d[j + 1])) / 6.0;
}

}  // namespace schro::kernels::avx2

#else

namespace schro::kernels::avx2 {
namespace {
[[noreturn]] void missing() { fail(ErrorCode::unsupported, "AVX2 kernels not compiled in"); }
}  // namespace

double dot(std::span<const double>, std::span<const double>) { missing(); }
void axpy(double, std::span<const double>, std::span<double>) { missing(); }
double max_abs(std::span<const double>) { missing(); }
double weighted_sum_sq(std::span<const double>, std::span<const double>) { missing(); }
double pl_l2_sq(std::span<const double>, std::span<const double>, std::span<const double>) { missing(); }
void pl_mass_apply(std::span<const double>, std::span<const double>, std::span<double>) { missing(); }

}  // namespace schro::kernels::avx2

#endif
