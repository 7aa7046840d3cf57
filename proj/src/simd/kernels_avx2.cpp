// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "monoclt/simd/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

namespace monoclt::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

cplx cauchy_sum(std::span<const double> t, std::span<const double> w, cplx z) {
  const std::size_t n = t.size();
  const double x = z.real();
  const double y = z.imag();
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d vy2 = _mm256_set1_pd(y * y);
  __m256d re = _mm256_setzero_pd();
  __m256d q = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(t.data() + k));
    const __m256d den = _mm256_fmadd_pd(d, d, vy2);
    const __m256d inv = _mm256_div_pd(_mm256_loadu_pd(w.data() + k), den);
    re = _mm256_fmadd_pd(inv, d, re);
    q = _mm256_add_pd(q, inv);
  }
  double sre = hsum(re);
  double sq = hsum(q);
  for (; k < n; ++k) {
    const double d = x - t[k];
    const double inv = w[k] / (d * d + y * y);
    sre += inv * d;
    sq += inv;
  }
  return {sre, -y * sq};
}

void cauchy_sum_batch(std::span<const double> t, std::span<const double> w,
                      std::span<const cplx> z, std::span<cplx> out) {
  const std::size_t m = z.size();
  const std::size_t n = t.size();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    // Lane order after the unpack is (0, 2, 1, 3); the repack below undoes it.
    const double* zp = reinterpret_cast<const double*>(z.data() + i);
    const __m256d a = _mm256_loadu_pd(zp);
    const __m256d b = _mm256_loadu_pd(zp + 4);
    const __m256d x = _mm256_unpacklo_pd(a, b);
    const __m256d y = _mm256_unpackhi_pd(a, b);
    const __m256d y2 = _mm256_mul_pd(y, y);
    __m256d re = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n; ++k) {
      const __m256d d = _mm256_sub_pd(x, _mm256_set1_pd(t[k]));
      const __m256d den = _mm256_fmadd_pd(d, d, y2);
      const __m256d inv = _mm256_div_pd(_mm256_set1_pd(w[k]), den);
      re = _mm256_fmadd_pd(inv, d, re);
      q = _mm256_add_pd(q, inv);
    }
    const __m256d im = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(y, q));
    double* op = reinterpret_cast<double*>(out.data() + i);
    _mm256_storeu_pd(op, _mm256_unpacklo_pd(re, im));
    _mm256_storeu_pd(op + 4, _mm256_unpackhi_pd(re, im));
  }
  for (; i < m; ++i) out[i] = scalar::cauchy_sum(t, w, z[i]);
}

RealPoleSum pole_sum_real(std::span<const double> t, std::span<const double> w,
                          double x) {
  const std::size_t n = t.size();
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d val = _mm256_setzero_pd();
  __m256d slope = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r =
        _mm256_div_pd(one, _mm256_sub_pd(_mm256_loadu_pd(t.data() + k), vx));
    const __m256d wr = _mm256_mul_pd(_mm256_loadu_pd(w.data() + k), r);
    val = _mm256_add_pd(val, wr);
    slope = _mm256_fmadd_pd(wr, r, slope);
  }
  RealPoleSum s{hsum(val), hsum(slope)};
  for (; k < n; ++k) {
    const double r = 1.0 / (t[k] - x);
    const double wr = w[k] * r;
    s.value += wr;
    s.slope += wr * r;
  }
  return s;
}

double harmonic_sum(std::span<const double> t, std::span<const double> m,
                    double x) {
  const std::size_t n = t.size();
  const double x2 = x * x;
  const __m256d vx2 = _mm256_set1_pd(x2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d tk = _mm256_loadu_pd(t.data() + k);
    const __m256d t2 = _mm256_mul_pd(tk, tk);
    const __m256d num = _mm256_mul_pd(_mm256_loadu_pd(m.data() + k), t2);
    acc = _mm256_add_pd(acc, _mm256_div_pd(num, _mm256_add_pd(t2, vx2)));
  }
  double s = hsum(acc);
  for (; k < n; ++k) {
    const double t2 = t[k] * t[k];
    s += m[k] * t2 / (t2 + x2);
  }
  return s * x2;
}

}  // namespace monoclt::simd::avx2
