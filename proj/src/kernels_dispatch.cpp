#include <atomic>
#include <cstdlib>
#include <string>

#include "schro/errors.hpp"
#include "schro/kernels.hpp"

namespace schro::kernels {
namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*max_abs)(std::span<const double>);
  double (*weighted_sum_sq)(std::span<const double>, std::span<const double>);
  double (*pl_l2_sq)(std::span<const double>, std::span<const double>, std::span<const double>);
  void (*pl_mass_apply)(std::span<const double>, std::span<const double>, std::span<double>);
};

constexpr Table kScalar{Isa::scalar,           scalar::dot,      scalar::axpy,
                        scalar::max_abs,       scalar::weighted_sum_sq,
                        scalar::pl_l2_sq,      scalar::pl_mass_apply};

constexpr Table kAvx2{Isa::avx2,             avx2::dot,      avx2::axpy,
                      avx2::max_abs,         avx2::weighted_sum_sq,
                      avx2::pl_l2_sq,        avx2::pl_mass_apply};

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && defined(SCHRO_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  if (const char* env = std::getenv("SCHRO_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && cpu_has_avx2()) return &kAvx2;
  }
  return cpu_has_avx2() ? &kAvx2 : &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

const Table& table() { return *current().load(std::memory_order_relaxed); }

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return table().isa; }

void force_isa(Isa isa) {
  if (!isa_supported(isa))
    fail(ErrorCode::unsupported, "CPU does not support " + std::string(to_string(isa)));
  current().store(isa == Isa::avx2 ? &kAvx2 : &kScalar);
}

double dot(std::span<const double> a, std::span<const double> b) { return table().dot(a, b); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x, y);
}

double max_abs(std::span<const double> x) { return table().max_abs(x); }

double weighted_sum_sq(std::span<const double> w, std::span<const double> x) {
  return table().weighted_sum_sq(w, x);
}

double pl_l2_sq(std::span<const double> du, std::span<const double> a,
                std::span<const double> b) {
  return table().pl_l2_sq(du, a, b);
}

void pl_mass_apply(std::span<const double> du, std::span<const double> d,
                   std::span<double> out) {
  table().pl_mass_apply(du, d, out);
}

}  // namespace schro::kernels
