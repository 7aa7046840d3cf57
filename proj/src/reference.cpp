#include <algorithm>
#include <cmath>
#include <numbers>

#include "monoclt/detail/reference.hpp"
#include "monoclt/error.hpp"
#include "monoclt/quadrature.hpp"
#include "reference_internal.hpp"

namespace monoclt::detail {
namespace {

using std::numbers::pi;
using Kind = ReferenceLaw::Kind;

constexpr double kSqrt2 = std::numbers::sqrt2;

double phi(double u) {
  if (!std::isfinite(u)) return 0.0;
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * pi);
}

double big_phi(double u) { return 0.5 * std::erfc(-u / kSqrt2); }

// Antiderivatives of u^k against the standard density, valid on the support.
double arcsine_anti(double u, int k) {
  u = std::clamp(u, -kSqrt2, kSqrt2);
  const double root = std::sqrt(std::max(0.0, 2.0 - u * u));
  const double as = std::asin(u / kSqrt2);
  switch (k) {
    case 0: return as / pi;
    case 1: return -root / pi;
    default: return (as - 0.5 * u * root) / pi;
  }
}

double semicircle_anti(double u, int k) {
  u = std::clamp(u, -2.0, 2.0);
  const double root = std::sqrt(std::max(0.0, 4.0 - u * u));
  const double as = std::asin(0.5 * u);
  switch (k) {
    case 0: return u * root / (4.0 * pi) + as / pi;
    case 1: return -root * root * root / (6.0 * pi);
    default: return (u / 8.0 * (2.0 * u * u - 4.0) * root + 2.0 * as) / (2.0 * pi);
  }
}

double normal_anti(double u, int k) {
  switch (k) {
    case 0: return big_phi(u);
    case 1: return -phi(u);
    default: return std::isfinite(u) ? big_phi(u) - u * phi(u) : big_phi(u);
  }
}

// integral of u^e over [lo, hi], 0 < lo <= hi (hi may be +inf when e < -1).
double power_integral(double lo, double hi, double e) {
  if (!(hi > lo)) return 0.0;
  if (std::abs(e + 1.0) < 1e-15) return std::log(hi) - std::log(lo);
  const double upper = std::isinf(hi) ? 0.0 : std::pow(hi, e + 1.0);
  return (upper - std::pow(lo, e + 1.0)) / (e + 1.0);
}

double power_tail_partial(double alpha, double a, double b, int k) {
  const double c = 0.5 * alpha;
  double acc = 0.0;
  // positive half [max(a, 1), b]
  const double plo = std::max(a, 1.0);
  if (b > plo) acc += c * power_integral(plo, b, k - alpha - 1.0);
  // negative half: v = -u with u in [max(1, -b), -a]
  const double nlo = std::max(1.0, -b);
  const double nhi = -a;
  if (nhi > nlo) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    acc += sign * c * power_integral(nlo, nhi, k - alpha - 1.0);
  }
  return acc;
}

// integral of u^k d(mu0) over [a, b] for the standardized law.
double base_partial(const ReferenceLaw& law, double a, double b, int k) {
  if (!(b > a)) return 0.0;
  switch (law.kind) {
    case Kind::Arcsine: return arcsine_anti(b, k) - arcsine_anti(a, k);
    case Kind::Semicircle: return semicircle_anti(b, k) - semicircle_anti(a, k);
    case Kind::Normal: return normal_anti(b, k) - normal_anti(a, k);
    case Kind::PowerTail: return power_tail_partial(law.param, a, b, k);
    case Kind::PointMass: break;
  }
  return 0.0;
}

}  // namespace

double point_position(const ReferenceLaw& law) {
  return law.loc + law.scale * law.param;
}

double reference_partial(const ReferenceLaw& law, double lo, double hi, int k) {
  if (law.kind == Kind::PointMass) {
    const double c = point_position(law);
    return (c >= lo && c <= hi) ? std::pow(c, k) : 0.0;
  }
  const double s = law.scale;
  const double l = law.loc;
  const double a = (lo - l) / s;
  const double b = (hi - l) / s;
  // integral of (l + s u)^k
  const double i0 = base_partial(law, a, b, 0);
  if (k == 0) return i0;
  const double i1 = base_partial(law, a, b, 1);
  if (k == 1) return l * i0 + s * i1;
  const double i2 = base_partial(law, a, b, 2);
  return l * l * i0 + 2.0 * l * s * i1 + s * s * i2;
}

double reference_cdf(const ReferenceLaw& law, double x, bool left_limit) {
  if (law.kind == Kind::PointMass) {
    const double c = point_position(law);
    return left_limit ? (x > c ? 1.0 : 0.0) : (x >= c ? 1.0 : 0.0);
  }
  const double u = (x - law.loc) / law.scale;
  switch (law.kind) {
    case Kind::Arcsine: return 0.5 + arcsine_anti(u, 0);
    case Kind::Semicircle: return 0.5 + semicircle_anti(u, 0);
    case Kind::Normal: return big_phi(u);
    case Kind::PowerTail: {
      const double alpha = law.param;
      if (u <= -1.0) return 0.5 * std::pow(-u, -alpha);
      if (u < 1.0) return 0.5;
      return 1.0 - 0.5 * std::pow(u, -alpha);
    }
    case Kind::PointMass: break;
  }
  return 0.0;
}

double reference_density(const ReferenceLaw& law, double x) {
  const double u = (x - law.loc) / law.scale;
  double d = 0.0;
  switch (law.kind) {
    case Kind::Arcsine:
      d = std::abs(u) < kSqrt2 ? 1.0 / (pi * std::sqrt(2.0 - u * u)) : 0.0;
      break;
    case Kind::Semicircle:
      d = std::abs(u) < 2.0 ? std::sqrt(4.0 - u * u) / (2.0 * pi) : 0.0;
      break;
    case Kind::Normal: d = phi(u); break;
    case Kind::PowerTail:
      d = std::abs(u) >= 1.0 ? 0.5 * law.param * std::pow(std::abs(u), -law.param - 1.0)
                             : 0.0;
      break;
    case Kind::PointMass: return 0.0;
  }
  return d / law.scale;
}

namespace {

template <class T, class F>
T expect_impl(const ReferenceLaw& law, const F& f) {
  const double s = law.scale;
  const double l = law.loc;
  switch (law.kind) {
    case Kind::PointMass: return f(point_position(law));
    case Kind::Arcsine:
      return quad::integrate<T>(
                 [&](double th) { return f(l + s * kSqrt2 * std::cos(th)); }, 0.0, pi) /
             pi;
    case Kind::Semicircle:
      return quad::integrate<T>(
                 [&](double th) {
                   const double sn = std::sin(th);
                   return f(l + 2.0 * s * std::cos(th)) * (sn * sn);
                 },
                 0.0, pi) *
             (2.0 / pi);
    case Kind::Normal:
      return quad::integrate_to_infinity<T>(
          [&](double u) { return (f(l + s * u) + f(l - s * u)) * phi(u); }, 0.0);
    case Kind::PowerTail: {
      const double alpha = law.param;
      return quad::integrate_to_infinity<T>(
                 [&](double v) {
                   const double u = std::exp(v);
                   return (f(l + s * u) + f(l - s * u)) * std::exp(-alpha * v);
                 },
                 0.0) *
             (0.5 * alpha);
    }
  }
  return T{};
}

}  // namespace

double expect(const ReferenceLaw& law, const std::function<double(double)>& f) {
  return expect_impl<double>(law, f);
}

std::complex<double> expect(const ReferenceLaw& law,
                            const std::function<std::complex<double>(double)>& f) {
  return expect_impl<std::complex<double>>(law, f);
}

}  // namespace monoclt::detail
