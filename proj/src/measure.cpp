#include "monoclt/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "monoclt/detail/reference.hpp"
#include "monoclt/error.hpp"
#include "monoclt/simd/kernels.hpp"
#include "reference_internal.hpp"

namespace monoclt {
namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kPruneMass = 1e-15;

bool close_positions(double a, double b) {
  return std::abs(a - b) < kMergeTol * (1.0 + std::abs(a));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

// ---------------------------------------------------------------- atomic

AtomicMeasure::AtomicMeasure(std::vector<double> x, std::vector<double> m,
                             Mode mode, double pruned)
    : x_(std::move(x)), m_(std::move(m)), mode_(mode), pruned_(pruned) {
  total_ = std::accumulate(m_.begin(), m_.end(), 0.0);
  std::vector<std::size_t> order(x_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x_[a]) < std::abs(x_[b]);
  });
  abs_sorted_.reserve(x_.size());
  cum_second_.reserve(x_.size());
  double acc = 0.0;
  for (std::size_t i : order) {
    abs_sorted_.push_back(std::abs(x_[i]));
    acc += m_[i] * x_[i] * x_[i];
    cum_second_.push_back(acc);
  }
}

AtomicMeasure AtomicMeasure::build(std::vector<Atom> atoms, Mode mode,
                                   double pruned) {
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.x)) throw ValidationError("atom position is not finite");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass))
      throw ValidationError("atom masses must be positive and finite");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<double> x;
  std::vector<double> m;
  x.reserve(atoms.size());
  m.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!x.empty() && close_positions(x.back(), a.x)) {
      m.back() += a.mass;
    } else {
      x.push_back(a.x);
      m.push_back(a.mass);
    }
  }
  if (mode == Mode::Probability) {
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    const double slack = 1e-12 + 1e-16 * static_cast<double>(m.size());
    if (std::abs(total - 1.0) > slack)
      throw ValidationError("probability masses sum to " + std::to_string(total));
  }
  return AtomicMeasure(std::move(x), std::move(m), mode, pruned);
}

AtomicMeasure AtomicMeasure::probability(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("probability measure needs an atom");
  return build(std::move(atoms), Mode::Probability, 0.0);
}

AtomicMeasure AtomicMeasure::finite(std::vector<Atom> atoms) {
  return build(std::move(atoms), Mode::Finite, 0.0);
}

AtomicMeasure AtomicMeasure::point(double c) {
  return build({{c, 1.0}}, Mode::Probability, 0.0);
}

AtomicMeasure AtomicMeasure::empty() { return build({}, Mode::Finite, 0.0); }

std::vector<Atom> AtomicMeasure::atoms() const {
  std::vector<Atom> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = {x_[i], m_[i]};
  return out;
}

double AtomicMeasure::second_moment_within(double r) const {
  const auto it = std::upper_bound(abs_sorted_.begin(), abs_sorted_.end(), r);
  if (it == abs_sorted_.begin()) return 0.0;
  return cum_second_[static_cast<std::size_t>(it - abs_sorted_.begin()) - 1];
}

double AtomicMeasure::smallest_nonzero_radius() const noexcept {
  for (double a : abs_sorted_)
    if (a > 0.0) return a;
  return kDivergent;
}

// ---------------------------------------------------------------- grid

GridDensity::GridDensity(double x0, double h, std::vector<double> values,
                         double clamped_mass)
    : x0_(x0), h_(h), values_(std::move(values)), clamped_(clamped_mass) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw ValidationError("grid spacing must be positive");
  if (!std::isfinite(x0_)) throw ValidationError("grid origin must be finite");
  if (values_.size() < 2) throw ValidationError("grid needs at least two nodes");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("grid density values must be finite and nonnegative");
  double acc = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i)
    acc += 0.5 * (values_[i - 1] + values_[i]) * h_;
  total_ = acc;
}

std::vector<double> GridDensity::cumulative() const {
  std::vector<double> c(values_.size(), 0.0);
  for (std::size_t i = 1; i < values_.size(); ++i)
    c[i] = c[i - 1] + 0.5 * (values_[i - 1] + values_[i]) * h_;
  return c;
}

namespace {

// Trapezoid integral of f(x) * density over [lo, hi] clipped to the grid,
// with linear interpolation of the integrand on partial cells.
template <class F>
double grid_integral(const GridDensity& g, double lo, double hi, F f) {
  lo = std::max(lo, g.x_min());
  hi = std::min(hi, g.x_max());
  if (!(hi > lo)) return 0.0;
  const auto vals = g.values();
  const double h = g.h();
  auto node = [&](std::size_t i) { return f(g.x(i)) * vals[i]; };
  auto interp = [&](double x) {
    const double s = (x - g.x_min()) / h;
    std::size_t i = static_cast<std::size_t>(std::floor(s));
    if (i >= vals.size() - 1) i = vals.size() - 2;
    const double frac = s - static_cast<double>(i);
    const double d = vals[i] * (1.0 - frac) + vals[i + 1] * frac;
    return f(x) * d;
  };
  const double s_lo = (lo - g.x_min()) / h;
  const double s_hi = (hi - g.x_min()) / h;
  std::size_t first = static_cast<std::size_t>(std::ceil(s_lo - 1e-12));
  std::size_t last = static_cast<std::size_t>(std::floor(s_hi + 1e-12));
  last = std::min(last, vals.size() - 1);
  if (first > last) return 0.5 * (interp(lo) + interp(hi)) * (hi - lo);
  double acc = 0.0;
  for (std::size_t i = first; i < last; ++i) acc += 0.5 * (node(i) + node(i + 1)) * h;
  const double x_first = g.x(first);
  const double x_last = g.x(last);
  if (x_first > lo) acc += 0.5 * (interp(lo) + node(first)) * (x_first - lo);
  if (hi > x_last) acc += 0.5 * (node(last) + interp(hi)) * (hi - x_last);
  return acc;
}

}  // namespace

// ---------------------------------------------------------------- reference

ReferenceLaw ReferenceLaw::power_tail(double alpha) {
  require_positive(alpha, "power-tail index");
  return {Kind::PowerTail, alpha};
}

bool Measure::is_degenerate() const noexcept {
  if (const auto* a = as_atomic()) return a->size() == 1;
  if (const auto* r = as_reference()) return r->kind == ReferenceLaw::Kind::PointMass;
  return false;
}

// ---------------------------------------------------------------- functionals

namespace {

Moments reference_moments(const ReferenceLaw& law) {
  using K = ReferenceLaw::Kind;
  double mean0 = 0.0;
  double var0 = 1.0;
  switch (law.kind) {
    case K::PointMass: {
      const double c = detail::point_position(law);
      return {c, c * c, 0.0};
    }
    case K::Arcsine:
    case K::Normal:
    case K::Semicircle: break;
    case K::PowerTail: {
      const double alpha = law.param;
      if (alpha <= 1.0) return {kDivergent, kDivergent, kDivergent};
      if (alpha <= 2.0) return {law.loc, kDivergent, kDivergent};
      var0 = alpha / (alpha - 2.0);
      break;
    }
  }
  const double mean = law.loc + law.scale * mean0;
  const double var = law.scale * law.scale * var0;
  return {mean, var + mean * mean, var};
}

}  // namespace

Moments moments(const Measure& m) {
  if (const auto* a = m.as_atomic()) {
    double s1 = 0.0, s2 = 0.0;
    const auto x = a->positions();
    const auto w = a->masses();
    for (std::size_t i = 0; i < x.size(); ++i) {
      s1 += w[i] * x[i];
      s2 += w[i] * x[i] * x[i];
    }
    const double total = a->total_mass();
    const double mean = total > 0.0 ? s1 / total : 0.0;
    // variance about the mean, computed directly to avoid cancellation
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += w[i] * (x[i] - mean) * (x[i] - mean);
    return {s1, s2, total > 0.0 ? v / total : 0.0};
  }
  if (const auto* g = m.as_grid()) {
    const double inf = kDivergent;
    const double total = g->total_mass();
    const double s1 = grid_integral(*g, -inf, inf, [](double t) { return t; });
    const double s2 = grid_integral(*g, -inf, inf, [](double t) { return t * t; });
    const double mean = total > 0.0 ? s1 / total : 0.0;
    const double v = grid_integral(*g, -inf, inf,
                                   [&](double t) { return (t - mean) * (t - mean); });
    return {s1, s2, total > 0.0 ? v / total : 0.0};
  }
  return reference_moments(*m.as_reference());
}

double truncated_variance(const Measure& m, double x) {
  require_positive(x, "truncation radius");
  if (const auto* a = m.as_atomic()) return a->second_moment_within(x);
  if (const auto* g = m.as_grid())
    return grid_integral(*g, -x, x, [](double t) { return t * t; });
  return detail::reference_partial(*m.as_reference(), -x, x, 2);
}

double harmonic_variance(const Measure& m, double x) {
  require_positive(x, "scale");
  const double x2 = x * x;
  auto f = [x2](double t) {
    const double t2 = t * t;
    return t2 * x2 / (t2 + x2);
  };
  if (const auto* a = m.as_atomic()) return simd::harmonic_sum(a->positions(), a->masses(), x);
  if (const auto* g = m.as_grid()) return grid_integral(*g, -kDivergent, kDivergent, f);
  const ReferenceLaw& law = *m.as_reference();
  if (law.kind == ReferenceLaw::Kind::PowerTail && law.param == 2.0 &&
      law.loc == 0.0) {
    const double s2 = law.scale * law.scale;
    return s2 * std::log1p(x2 / s2);
  }
  return detail::expect(law, std::function<double(double)>(f));
}

double tail(const Measure& m, double x) {
  require_positive(x, "radius");
  if (const auto* a = m.as_atomic()) {
    double acc = 0.0;
    const auto t = a->positions();
    const auto w = a->masses();
    for (std::size_t i = 0; i < t.size(); ++i)
      if (std::abs(t[i]) > x) acc += w[i];
    return acc;
  }
  if (const auto* g = m.as_grid())
    return std::max(0.0, g->total_mass() - grid_integral(*g, -x, x, [](double) { return 1.0; }));
  const ReferenceLaw& law = *m.as_reference();
  if (law.kind == ReferenceLaw::Kind::PointMass)
    return std::abs(detail::point_position(law)) > x ? 1.0 : 0.0;
  return std::clamp(1.0 - detail::reference_partial(law, -x, x, 0), 0.0, 1.0);
}

double cdf(const Measure& m, double x, bool left_limit) {
  if (const auto* a = m.as_atomic()) {
    const auto t = a->positions();
    const auto w = a->masses();
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < x || (!left_limit && t[i] == x)) acc += w[i];
      else break;
    }
    return acc;
  }
  if (const auto* g = m.as_grid())
    return grid_integral(*g, -kDivergent, x, [](double) { return 1.0; });
  return detail::reference_cdf(*m.as_reference(), x, left_limit);
}

// ---------------------------------------------------------------- transforms

AtomicMeasure dilate(const AtomicMeasure& m, double b) {
  require_positive(b, "dilation factor");
  std::vector<Atom> atoms = m.atoms();
  for (Atom& a : atoms) a.x *= b;
  return m.mode() == AtomicMeasure::Mode::Probability
             ? AtomicMeasure::probability(std::move(atoms))
             : AtomicMeasure::finite(std::move(atoms));
}

AtomicMeasure shift(const AtomicMeasure& m, double c) {
  std::vector<Atom> atoms = m.atoms();
  for (Atom& a : atoms) a.x += c;
  return m.mode() == AtomicMeasure::Mode::Probability
             ? AtomicMeasure::probability(std::move(atoms))
             : AtomicMeasure::finite(std::move(atoms));
}

Measure dilate(const Measure& m, double b) {
  require_positive(b, "dilation factor");
  if (const auto* a = m.as_atomic()) return dilate(*a, b);
  if (const auto* g = m.as_grid()) {
    std::vector<double> v(g->values().begin(), g->values().end());
    for (double& d : v) d /= b;
    return GridDensity(g->x0() * b, g->h() * b, std::move(v), g->clamped_mass());
  }
  ReferenceLaw law = *m.as_reference();
  law.loc *= b;
  law.scale *= b;
  return law;
}

Measure shift(const Measure& m, double c) {
  if (const auto* a = m.as_atomic()) return shift(*a, c);
  if (const auto* g = m.as_grid()) {
    return GridDensity(g->x0() + c, g->h(),
                       std::vector<double>(g->values().begin(), g->values().end()),
                       g->clamped_mass());
  }
  ReferenceLaw law = *m.as_reference();
  law.loc += c;
  return law;
}

AtomicMeasure classical_convolve(const AtomicMeasure& a, const AtomicMeasure& b,
                                 std::size_t cap) {
  const std::size_t pairs = a.size() * b.size();
  // Merging can shrink the pair set a lot (lattice measures), but not beyond
  // what fits in memory.
  if (pairs > 64 * cap)
    throw CapacityExceeded("classical convolution would form " + std::to_string(pairs) +
                           " atom pairs (cap " + std::to_string(cap) + ")");
  std::vector<Atom> out;
  out.reserve(pairs);
  const auto xa = a.positions();
  const auto ma = a.masses();
  const auto xb = b.positions();
  const auto mb = b.masses();
  for (std::size_t i = 0; i < xa.size(); ++i)
    for (std::size_t j = 0; j < xb.size(); ++j) out.push_back({xa[i] + xb[j], ma[i] * mb[j]});
  std::sort(out.begin(), out.end(), [](const Atom& p, const Atom& q) { return p.x < q.x; });
  std::vector<double> x;
  std::vector<double> m;
  for (const Atom& p : out) {
    if (p.mass == 0.0) continue;  // underflow far out in the tails
    if (!x.empty() && close_positions(x.back(), p.x)) m.back() += p.mass;
    else {
      x.push_back(p.x);
      m.push_back(p.mass);
    }
  }
  const bool prob = a.mode() == AtomicMeasure::Mode::Probability &&
                    b.mode() == AtomicMeasure::Mode::Probability;
  const double target = prob ? 1.0 : a.total_mass() * b.total_mass();
  double pruned = a.pruned_mass() + b.pruned_mass();
  if (x.size() > cap) {
    std::vector<double> kx;
    std::vector<double> km;
    double dropped = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (m[i] < kPruneMass) dropped += m[i];
      else {
        kx.push_back(x[i]);
        km.push_back(m[i]);
      }
    }
    if (kx.size() > cap)
      throw CapacityExceeded("classical convolution keeps " + std::to_string(kx.size()) +
                             " atoms after pruning (cap " + std::to_string(cap) + ")");
    x = std::move(kx);
    m = std::move(km);
    pruned += dropped;
  }
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& w : m) w *= target / total;
  return AtomicMeasure(std::move(x), std::move(m),
                       prob ? AtomicMeasure::Mode::Probability : AtomicMeasure::Mode::Finite,
                       pruned);
}

}  // namespace monoclt
