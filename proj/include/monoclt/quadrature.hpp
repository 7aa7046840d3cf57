#pragma once

// Adaptive Gauss-Kronrod (7/15) for real- or complex-valued integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace monoclt::quad {

namespace detail {

inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }

template <class T, class F>
void kronrod(F& f, double a, double b, T& k15, T& g7) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  k15 = fc * kWk[7];
  g7 = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const T s = f(c - dx) + f(c + dx);
    k15 += s * kWk[j];
    if (j % 2 == 1) g7 += s * kWg[j / 2];
  }
  k15 *= h;
  g7 *= h;
}

}  // namespace detail

/// Integrates f over [a, b] by interval bisection until every panel's
/// Kronrod/Gauss gap is below max(abs_tol, rel_tol * |estimate|) scaled to the
/// panel width.
template <class T, class F>
T integrate(F&& f, double a, double b, double rel_tol = 1e-12,
            double abs_tol = 1e-15, int max_depth = 40) {
  struct Panel {
    double a, b;
    int depth;
  };
  T first{}, g{};
  detail::kronrod<T>(f, a, b, first, g);
  const double scale = detail::magnitude(first);
  const double tol = std::max(abs_tol, rel_tol * scale);
  const double width = b - a;
  T total{};
  std::vector<Panel> stack{{a, b, 0}};
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    T k{}, g7{};
    detail::kronrod<T>(f, p.a, p.b, k, g7);
    const double err = detail::magnitude(k - g7);
    if (err <= tol * (p.b - p.a) / width || p.depth >= max_depth) {
      total += k;
    } else {
      const double mid = 0.5 * (p.a + p.b);
      stack.push_back({mid, p.b, p.depth + 1});
      stack.push_back({p.a, mid, p.depth + 1});
    }
  }
  return total;
}

/// Integral over [a, inf) through t = a + s / (1 - s).
template <class T, class F>
T integrate_to_infinity(F&& f, double a, double rel_tol = 1e-12,
                        double abs_tol = 1e-15) {
  auto g = [&](double s) -> T {
    if (s >= 1.0) return T{};
    const double u = 1.0 - s;
    return f(a + s / u) / (u * u);
  };
  return integrate<T>(g, 0.0, 1.0, rel_tol, abs_tol);
}

}  // namespace monoclt::quad
