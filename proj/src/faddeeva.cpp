#include "faddeeva.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace monoclt::detail {
namespace {

constexpr int kTerms = 40;
constexpr int kM = 2 * kTerms;

struct Coefficients {
  double L;
  std::array<double, kTerms> c;  // c[n-1] multiplies Z^(n-1)

  Coefficients() : L(std::sqrt(kTerms / std::numbers::sqrt2)), c{} {
    // Samples of exp(-t^2)(L^2 + t^2) at t = L tan(theta / 2), theta = k pi / M,
    // k = -M+1 .. M-1, with a leading zero, then a half-length rotation.
    std::array<double, 2 * kM> f{};
    for (int k = -kM + 1; k <= kM - 1; ++k) {
      const double theta = k * std::numbers::pi / kM;
      const double t = L * std::tan(0.5 * theta);
      f[static_cast<std::size_t>(k + kM)] = std::exp(-t * t) * (L * L + t * t);
    }
    std::array<double, 2 * kM> shifted{};
    for (int j = 0; j < 2 * kM; ++j)
      shifted[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>((j + kM) % (2 * kM))];
    for (int n = 1; n <= kTerms; ++n) {
      double re = 0.0;
      for (int j = 0; j < 2 * kM; ++j)
        re += shifted[static_cast<std::size_t>(j)] *
              std::cos(2.0 * std::numbers::pi * j * n / (2.0 * kM));
      c[static_cast<std::size_t>(n - 1)] = re / (2.0 * kM);
    }
  }
};

const Coefficients& coefficients() {
  static const Coefficients coeffs;
  return coeffs;
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  const Coefficients& k = coefficients();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> den = k.L - iz;
  const std::complex<double> Z = (k.L + iz) / den;
  std::complex<double> p = k.c[kTerms - 1];
  for (int n = kTerms - 2; n >= 0; --n) p = p * Z + k.c[static_cast<std::size_t>(n)];
  return 2.0 * p / (den * den) + (1.0 / std::sqrt(std::numbers::pi)) / den;
}

}  // namespace monoclt::detail
