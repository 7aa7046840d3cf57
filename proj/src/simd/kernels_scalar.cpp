#include "monoclt/simd/kernels.hpp"

#include <cstddef>

namespace monoclt::simd::scalar {

cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double y2 = y * y;
  double re = 0.0;
  double q = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double d = x - t[k];
    const double inv = w[k] / (d * d + y2);
    re += inv * d;
    q += inv;
  }
  return {re, -y * q};
}

void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out) {
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = cauchy_sum(t, w, z[i]);
}

RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x) {
  RealPoleSum s;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double r = 1.0 / (t[k] - x);
    const double wr = w[k] * r;
    s.value += wr;
    s.slope += wr * r;
  }
  return s;
}

double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x) {
  const double x2 = x * x;
  double acc = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double t2 = t[k] * t[k];
    acc += m[k] * t2 / (t2 + x2);
  }
  return acc * x2;
}

}  // namespace monoclt::simd::scalar
