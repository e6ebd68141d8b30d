#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels::scalar and an AVX2/FMA variant in kernels::avx2; the unqualified
// entry points forward to whichever table was selected at startup.
//
// Selection order: SCHRO_ISA environment variable ("scalar" or "avx2"),
// then the best ISA the CPU reports. force_isa() overrides both.

#include <span>
#include <string_view>

namespace schro::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();

/// Switch the dispatch table. Throws Unsupported if the CPU lacks `isa`.
void force_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double max_abs(std::span<const double> x);

/// sum_i w_i * x_i^2
double weighted_sum_sq(std::span<const double> w, std::span<const double> x);

/// Exact squared L2 norm of the piecewise-linear interpolant of a - b on
/// knots with spacings du (du.size() == a.size() - 1).
double pl_l2_sq(std::span<const double> du, std::span<const double> a,
                std::span<const double> b);

/// out = M d, with M the P1 mass matrix for spacings du, so that
/// pl_l2_sq(du, d, 0) == dot(d, M d).
void pl_mass_apply(std::span<const double> du, std::span<const double> d,
                   std::span<double> out);

#define SCHRO_KERNEL_DECLS                                                        \
  double dot(std::span<const double> a, std::span<const double> b);               \
  void axpy(double alpha, std::span<const double> x, std::span<double> y);        \
  double max_abs(std::span<const double> x);                                      \
  double weighted_sum_sq(std::span<const double> w, std::span<const double> x);   \
  double pl_l2_sq(std::span<const double> du, std::span<const double> a,          \
                  std::span<const double> b);                                     \
  void pl_mass_apply(std::span<const double> du, std::span<const double> d,       \
                     std::span<double> out);

namespace scalar {
SCHRO_KERNEL_DECLS
}

namespace avx2 {
SCHRO_KERNEL_DECLS
}

#undef SCHRO_KERNEL_DECLS

}  // namespace schro::kernels
