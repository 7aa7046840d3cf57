#pragma once

// Inner-loop kernels shared by the transform, convolution and ergodic modules.
//
// Every kernel has a portable scalar reference in `simd::scalar` and, on x86-64,
// an AVX2+FMA variant in `simd::avx2`. The unqualified entry points dispatch at
// runtime to the best variant the CPU supports. Setting MONOCLT_SIMD=scalar in
// the environment pins the scalar path.

#include <complex>
#include <span>

namespace monoclt::simd {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa) noexcept;

/// The variant the dispatching entry points currently use.
Isa active_isa() noexcept;

/// Best variant supported by this CPU and build, ignoring any override.
Isa detected_isa() noexcept;

/// Pins the dispatcher. Requesting an unsupported ISA falls back to scalar.
void set_isa(Isa isa) noexcept;

struct RealPoleSum {
  double value = 0.0;  // sum of w / (t - x)
  double slope = 0.0;  // sum of w / (t - x)^2
};

// sum_k w_k / (z - t_k)
cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z);

// out[i] = sum_k w_k / (z[i] - t_k); lanes run across the z points.
void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out);

RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x);

// sum_k m_k t_k^2 x^2 / (t_k^2 + x^2)
double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x);

namespace scalar {
cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z);
void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out);
RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x);
double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MONOCLT_HAVE_AVX2_KERNELS 1
namespace avx2 {
cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z);
void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out);
RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x);
double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x);
}  // namespace avx2
#else
#define MONOCLT_HAVE_AVX2_KERNELS 0
#endif

}  // namespace monoclt::simd
