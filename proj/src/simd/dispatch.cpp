#include <atomic>
#include <cstdlib>
#include <string_view>

#include "monoclt/simd/kernels.hpp"

namespace monoclt::simd {
namespace {

Isa probe() noexcept {
#if MONOCLT_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::Avx2;
#endif
  return Isa::Scalar;
}

Isa initial() noexcept {
  if (const char* env = std::getenv("MONOCLT_SIMD")) {
    if (std::string_view(env) == "scalar") return Isa::Scalar;
  }
  return probe();
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

bool use_avx2() noexcept {
  return current().load(std::memory_order_relaxed) == Isa::Avx2;
}

}  // namespace

const char* isa_name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

Isa active_isa() noexcept { return current().load(); }

Isa detected_isa() noexcept {
  static const Isa isa = probe();
  return isa;
}

void set_isa(Isa isa) noexcept {
  current().store(isa == Isa::Avx2 && detected_isa() == Isa::Avx2 ? Isa::Avx2
                                                                  : Isa::Scalar);
}

#if MONOCLT_HAVE_AVX2_KERNELS
#define MONOCLT_DISPATCH(fn, ...) \
  (use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define MONOCLT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z) {
  return MONOCLT_DISPATCH(cauchy_sum, t, w, z);
}

void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out) {
  MONOCLT_DISPATCH(cauchy_sum_batch, t, w, z, out);
}

RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x) {
  return MONOCLT_DISPATCH(pole_sum_real, t, w, x);
}

double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x) {
  return MONOCLT_DISPATCH(harmonic_sum, t, m, x);
}

#undef MONOCLT_DISPATCH

}  // namespace monoclt::simd
