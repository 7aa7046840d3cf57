#include "monoclt/htransform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "faddeeva.hpp"
#include "monoclt/detail/reference.hpp"
#include "monoclt/error.hpp"
#include "monoclt/parallel.hpp"
#include "monoclt/simd/kernels.hpp"
#include "reference_internal.hpp"

namespace monoclt {

namespace {

constexpr double kBreakdownTol = 1e-9;
// Below this many atoms a batch vectorizes across evaluation points instead
// of across atoms.
constexpr std::size_t kBatchAcrossPoints = 64;

using Kind = SelfMap::Kind;

void check_upper(cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("evaluation point must satisfy Im z > 0");
}

void check_intermediate(cplx w) {
  if (!(w.imag() >= -kBreakdownTol) || !std::isfinite(w.real()))
    throw NumericBreakdown("intermediate value left the upper half-plane (Im = " +
                           std::to_string(w.imag()) + ")");
}

}  // namespace

cplx sqrt_upper(cplx w) {
  const cplx s = std::sqrt(w);
  return s.imag() < 0.0 ? -s : s;
}

struct SelfMap::Node {
  Kind kind = Kind::FromMeasure;
  std::optional<Measure> measure;
  // Pole data: for measures, G(z) = sum w / (z - t); for Nevanlinna maps,
  // F(z) = z + shift - sum w / (z - t).
  std::vector<double> t;
  std::vector<double> w;
  double shift = 0.0;
  std::vector<SelfMap> children;
  std::size_t count = 0;
  double factor = 1.0;
  FreeConvOptions options;

  cplx eval(cplx z) const;
  void eval_batch(std::span<cplx> io) const;
};

namespace {

cplx pole_cauchy(const std::vector<double>& t, const std::vector<double>& w, cplx z) {
  return simd::cauchy_sum(t, w, z);
}

void pole_cauchy_batch(const std::vector<double>& t, const std::vector<double>& w,
                       std::span<const cplx> z, std::span<cplx> out) {
  if (t.size() <= kBatchAcrossPoints) {
    simd::cauchy_sum_batch(t, w, z, out);
  } else {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = simd::cauchy_sum(t, w, z[i]);
  }
}

cplx reference_f(const ReferenceLaw& law, cplx z) {
  using K = ReferenceLaw::Kind;
  if (law.kind == K::PointMass) return z - detail::point_position(law);
  const double s = law.scale;
  const cplx u = (z - law.loc) / s;
  cplx f;
  switch (law.kind) {
    case K::Arcsine: f = sqrt_upper(u * u - 2.0); break;
    case K::Semicircle: f = 0.5 * (u + sqrt_upper(u * u - 4.0)); break;
    case K::Normal: {
      const cplx g = cplx(0.0, -std::sqrt(std::numbers::pi / 2.0)) *
                     detail::faddeeva(u / std::numbers::sqrt2);
      f = 1.0 / g;
      break;
    }
    case K::PowerTail: {
      ReferenceLaw base = law;
      base.scale = 1.0;
      base.loc = 0.0;
      const cplx g = detail::expect(
          base, std::function<cplx(double)>([u](double t) { return 1.0 / (u - t); }));
      f = 1.0 / g;
      break;
    }
    case K::PointMass: break;
  }
  return s * f;
}

}  // namespace

cplx SelfMap::Node::eval(cplx z) const {
  switch (kind) {
    case Kind::FromMeasure:
      if (measure->as_reference()) return reference_f(*measure->as_reference(), z);
      if (t.empty()) return z + shift;
      return 1.0 / pole_cauchy(t, w, z);
    case Kind::FromNevanlinna: return z + shift - pole_cauchy(t, w, z);
    case Kind::Compose: {
      cplx v = z;
      for (auto it = children.rbegin(); it != children.rend(); ++it) {
        v = it->node_->eval(v);
        check_intermediate(v);
      }
      return v;
    }
    case Kind::Iterate: {
      cplx v = z;
      const Node& base = *children.front().node_;
      for (std::size_t k = 0; k < count; ++k) {
        v = base.eval(v);
        check_intermediate(v);
      }
      return v;
    }
    case Kind::Dilated: return factor * children.front().node_->eval(z / factor);
    case Kind::Arcsine: return sqrt_upper(z * z - 2.0);
    case Kind::FreeConv:
      return detail::free_convolution_eval(children[0], children[1], options, z);
  }
  return z;
}

void SelfMap::Node::eval_batch(std::span<cplx> io) const {
  auto check_all = [&] {
    for (const cplx& v : io) check_intermediate(v);
  };
  switch (kind) {
    case Kind::FromMeasure:
      if (!measure->as_reference() && t.empty()) {
        for (cplx& v : io) v += shift;
        return;
      }
      if (!measure->as_reference()) {
        std::vector<cplx> g(io.size());
        pole_cauchy_batch(t, w, io, g);
        for (std::size_t i = 0; i < io.size(); ++i) io[i] = 1.0 / g[i];
        return;
      }
      break;
    case Kind::FromNevanlinna: {
      std::vector<cplx> g(io.size());
      pole_cauchy_batch(t, w, io, g);
      for (std::size_t i = 0; i < io.size(); ++i) io[i] = io[i] + shift - g[i];
      return;
    }
    case Kind::Compose:
      for (auto it = children.rbegin(); it != children.rend(); ++it) {
        it->node_->eval_batch(io);
        check_all();
      }
      return;
    case Kind::Iterate: {
      const Node& base = *children.front().node_;
      for (std::size_t k = 0; k < count; ++k) {
        base.eval_batch(io);
        check_all();
      }
      return;
    }
    case Kind::Dilated:
      for (cplx& v : io) v /= factor;
      children.front().node_->eval_batch(io);
      for (cplx& v : io) v *= factor;
      return;
    default: break;
  }
  for (cplx& v : io) v = eval(v);
}

SelfMap SelfMap::identity() { return from_measure(AtomicMeasure::point(0.0)); }

SelfMap SelfMap::from_measure(Measure m) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::FromMeasure;
  if (const auto* a = m.as_atomic()) {
    if (a->mode() != AtomicMeasure::Mode::Probability)
      throw ValidationError("F-map needs a probability measure");
    if (a->size() == 1) {
      // delta_c: F(z) = z - c exactly, no poles
      node->shift = -a->positions()[0];
      node->measure = std::move(m);
      return SelfMap(std::move(node));
    }
    node->t.assign(a->positions().begin(), a->positions().end());
    node->w.assign(a->masses().begin(), a->masses().end());
  } else if (const auto* g = m.as_grid()) {
    const auto v = g->values();
    node->t.resize(v.size());
    node->w.resize(v.size());
    // trapezoid weights, renormalized so the map stays that of a probability law
    const double total = g->total_mass();
    if (!(total > 0.0)) throw ValidationError("grid density has zero mass");
    for (std::size_t i = 0; i < v.size(); ++i) {
      node->t[i] = g->x(i);
      const double edge = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
      node->w[i] = edge * g->h() * v[i] / total;
    }
  }
  node->measure.emplace(std::move(m));
  return SelfMap(std::move(node));
}

SelfMap SelfMap::from_nevanlinna(NevanlinnaRep rep) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::FromNevanlinna;
  const auto t = rep.sigma.positions();
  const auto s = rep.sigma.masses();
  node->t.assign(t.begin(), t.end());
  node->w.resize(t.size());
  double st = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    // (1 + t z)/(t - z) = -t + (1 + t^2)/(t - z)
    node->w[k] = s[k] * (1.0 + t[k] * t[k]);
    st += s[k] * t[k];
  }
  node->shift = rep.a - st;
  return SelfMap(std::move(node));
}

SelfMap SelfMap::compose(std::vector<SelfMap> maps) {
  if (maps.empty()) return identity();
  if (maps.size() == 1) return maps.front();
  auto node = std::make_shared<Node>();
  node->kind = Kind::Compose;
  node->children = std::move(maps);
  return SelfMap(std::move(node));
}

SelfMap SelfMap::iterate(SelfMap base, std::size_t n) {
  if (n == 0) return identity();
  if (n == 1) return base;
  auto node = std::make_shared<Node>();
  node->kind = Kind::Iterate;
  node->children.push_back(std::move(base));
  node->count = n;
  return SelfMap(std::move(node));
}

SelfMap SelfMap::dilated(SelfMap base, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("dilation factor must be positive");
  auto node = std::make_shared<Node>();
  node->kind = Kind::Dilated;
  node->children.push_back(std::move(base));
  node->factor = b;
  return SelfMap(std::move(node));
}

SelfMap SelfMap::arcsine() {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Arcsine;
  return SelfMap(std::move(node));
}

SelfMap SelfMap::free_convolution(SelfMap first, SelfMap second, FreeConvOptions options) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::FreeConv;
  node->children = {std::move(first), std::move(second)};
  node->options = options;
  return SelfMap(std::move(node));
}

SelfMap::Kind SelfMap::kind() const noexcept { return node_->kind; }

cplx SelfMap::operator()(cplx z) const {
  check_upper(z);
  const cplx v = node_->eval(z);
  check_intermediate(v);
  return v;
}

void SelfMap::eval_batch(std::span<const cplx> z, std::span<cplx> out) const {
  for (const cplx& v : z) check_upper(v);
  std::copy(z.begin(), z.end(), out.begin());
  node_->eval_batch(out.first(z.size()));
  for (const cplx& v : out.first(z.size())) check_intermediate(v);
}

cplx f_eval(const SelfMap& map, cplx z) { return map(z); }

cplx cauchy_eval(const Measure& m, cplx z) {
  check_upper(z);
  if (const auto* r = m.as_reference()) return 1.0 / reference_f(*r, z);
  if (const auto* a = m.as_atomic()) return simd::cauchy_sum(a->positions(), a->masses(), z);
  const GridDensity& g = *m.as_grid();
  const auto v = g.values();
  std::vector<double> t(v.size());
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    t[i] = g.x(i);
    w[i] = ((i == 0 || i + 1 == v.size()) ? 0.5 : 1.0) * g.h() * v[i];
  }
  return simd::cauchy_sum(t, w, z);
}

// ---------------------------------------------------------------- Nevanlinna

NevanlinnaRep nevanlinna_extract(const AtomicMeasure& m) {
  if (m.mode() != AtomicMeasure::Mode::Probability || m.is_empty())
    throw ValidationError("Nevanlinna extraction needs an atomic probability measure");
  const auto x = m.positions();
  const auto w = m.masses();
  if (m.size() == 1) return {-x[0], AtomicMeasure::empty()};

  auto g = [&](double s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] / (s - x[k]);
    return acc;
  };
  std::vector<Atom> sigma;
  sigma.reserve(x.size() - 1);
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    // G decreases from +inf to -inf between consecutive atoms.
    double lo = x[j];
    double hi = x[j + 1];
    double zeta = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      zeta = mid;
      if (mid <= lo || mid >= hi) break;
      if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid)) * 1e-2) break;
      const double v = g(mid);
      if (v == 0.0) break;
      if (v > 0.0) lo = mid;
      else hi = mid;
    }
    double slope = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = zeta - x[k];
      slope += w[k] / (d * d);
    }
    sigma.push_back({zeta, 1.0 / ((1.0 + zeta * zeta) * slope)});
  }
  NevanlinnaRep rep{0.0, AtomicMeasure::finite(std::move(sigma))};
  // Fix a from F(i) = i + a + sum s (1 + t i) / (t - i).
  const cplx i1(0.0, 1.0);
  const cplx f_i = 1.0 / simd::cauchy_sum(x, w, i1);
  cplx integral = 0.0;
  const auto st = rep.sigma.positions();
  const auto sm = rep.sigma.masses();
  for (std::size_t k = 0; k < st.size(); ++k)
    integral += sm[k] * (1.0 + st[k] * i1) / (st[k] - i1);
  rep.a = (f_i - i1 - integral).real() + 0.0;  // no negative zero
  return rep;
}

SelfMap nevanlinna_synthesize(const NevanlinnaRep& rep) {
  return SelfMap::from_nevanlinna(rep);
}

// ---------------------------------------------------------------- inversion

Grid Grid::covering(double lo, double hi, double h) {
  if (!(h > 0.0) || !(hi > lo)) throw ValidationError("grid needs lo < hi and h > 0");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
  return {lo, h, n};
}

GridDensity measure_from_map(const SelfMap& map, const Grid& grid,
                             const InversionOptions& options) {
  if (!(options.eta > 0.0) || !std::isfinite(options.eta))
    throw DomainError("inversion height eta must be positive");
  if (!(grid.h > 0.0) || grid.count < 2) throw ValidationError("invalid inversion grid");
  const std::size_t n = grid.count;
  std::vector<double> dens(n, 0.0);
  auto sample = [&](double eta, std::size_t begin, std::size_t end, std::vector<double>& out) {
    std::vector<cplx> z(end - begin);
    std::vector<cplx> f(end - begin);
    for (std::size_t i = begin; i < end; ++i) z[i - begin] = cplx(grid.x(i), eta);
    map.eval_batch(z, f);
    for (std::size_t i = begin; i < end; ++i)
      out[i] = -(1.0 / f[i - begin]).imag() / std::numbers::pi;
  };
  std::vector<double> coarse(n, 0.0);
  std::vector<double> fine(n, 0.0);
  parallel_for(n, 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; b += 1024) {
      const std::size_t e = std::min(end, b + 1024);
      sample(options.eta, b, e, coarse);
      if (options.extrapolate) sample(0.5 * options.eta, b, e, fine);
    }
  });
  double clamped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = options.extrapolate ? 2.0 * fine[i] - coarse[i] : coarse[i];
    if (d < 0.0) {
      clamped += -d * grid.h;
      d = 0.0;
    }
    dens[i] = d;
  }
  return GridDensity(grid.x0, grid.h, std::move(dens), clamped);
}

// ---------------------------------------------------------------- KS distance

namespace {

// Interval that holds all but a negligible part of a reference law.
std::pair<double, double> reference_span(const ReferenceLaw& law) {
  using K = ReferenceLaw::Kind;
  double half = 0.0;
  switch (law.kind) {
    case K::Arcsine: half = std::numbers::sqrt2; break;
    case K::Semicircle: half = 2.0; break;
    case K::Normal: half = 9.0; break;
    case K::PowerTail: half = std::min(1e6, std::pow(1e-8, -1.0 / law.param)); break;
    case K::PointMass: {
      const double c = detail::point_position(law);
      return {c, c};
    }
  }
  return {law.loc - law.scale * half, law.loc + law.scale * half};
}

double mass_outside(const Measure& m, double lo, double hi) {
  return cdf(m, lo, true) + (1.0 - cdf(m, hi));
}

}  // namespace

double ks_distance(const Measure& source, const Measure& target, double coverage_tol) {
  const GridDensity* grid = source.as_grid();
  if (!grid) grid = target.as_grid();
  std::vector<double> points;
  if (grid) {
    if (std::abs(1.0 - grid->total_mass()) > coverage_tol)
      throw CoverageError("grid density misses " + std::to_string(1.0 - grid->total_mass()) +
                          " of its mass");
    const Measure& other = (grid == source.as_grid()) ? target : source;
    const double outside = mass_outside(other, grid->x_min(), grid->x_max());
    if (outside > coverage_tol)
      throw CoverageError("measure has " + std::to_string(outside) +
                          " mass outside the grid range");
    for (std::size_t i = 0; i < grid->size(); ++i) points.push_back(grid->x(i));
  } else {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const Measure* m : {&source, &target}) {
      std::pair<double, double> span{0.0, 0.0};
      if (const auto* a = m->as_atomic()) span = {a->positions().front(), a->positions().back()};
      else span = reference_span(*m->as_reference());
      lo = first ? span.first : std::min(lo, span.first);
      hi = first ? span.second : std::max(hi, span.second);
      first = false;
    }
    const double pad = 1e-6 * (1.0 + hi - lo);
    lo -= pad;
    hi += pad;
    constexpr std::size_t kDense = 20001;
    for (std::size_t i = 0; i < kDense; ++i)
      points.push_back(lo + (hi - lo) * static_cast<double>(i) / (kDense - 1));
  }

  double sup = 0.0;
  auto probe = [&](double x, bool left) {
    sup = std::max(sup, std::abs(cdf(source, x, left) - cdf(target, x, left)));
  };
  if (grid) {
    // cumulative arrays avoid a quadratic scan
    const std::vector<double> cum = grid->cumulative();
    const bool grid_is_source = grid == source.as_grid();
    const Measure& other = grid_is_source ? target : source;
    const AtomicMeasure* atoms = other.as_atomic();
    std::size_t k = 0;
    double atom_acc = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double x = grid->x(i);
      double c_other;
      if (atoms) {
        while (k < atoms->size() && atoms->positions()[k] <= x) atom_acc += atoms->masses()[k++];
        c_other = atom_acc;
      } else {
        c_other = cdf(other, x);
      }
      sup = std::max(sup, std::abs(cum[i] - c_other));
    }
    if (atoms) {
      for (double x : atoms->positions()) {
        if (x < grid->x_min() || x > grid->x_max()) continue;
        const double cg = cdf(Measure(*grid), x);
        sup = std::max(sup, std::abs(cg - cdf(other, x, true)));
        sup = std::max(sup, std::abs(cg - cdf(other, x, false)));
      }
    }
    return sup;
  }
  for (double x : points) probe(x, false);
  for (const Measure* m : {&source, &target}) {
    if (const auto* a = m->as_atomic()) {
      for (double x : a->positions()) {
        probe(x, true);
        probe(x, false);
      }
    } else if (const auto* r = m->as_reference();
               r && r->kind == ReferenceLaw::Kind::PointMass) {
      probe(detail::point_position(*r), true);
      probe(detail::point_position(*r), false);
    }
  }
  return sup;
}

// ---------------------------------------------------------------- tightness

TightnessReport tightness_stat(std::span<const SelfMap> maps, std::span<const double> ys,
                               double threshold) {
  TightnessReport report;
  if (ys.empty()) return report;
  for (double y : ys)
    if (!(y > 0.0)) throw DomainError("tightness heights must be positive");
  const std::size_t largest = static_cast<std::size_t>(
      std::max_element(ys.begin(), ys.end()) - ys.begin());
  for (const SelfMap& f : maps) {
    std::vector<double> row;
    row.reserve(ys.size());
    for (double y : ys) {
      const cplx iy(0.0, y);
      row.push_back(std::abs(f(iy) / iy - 1.0));
    }
    report.sup_at_largest_y = std::max(report.sup_at_largest_y, row[largest]);
    report.deviation.push_back(std::move(row));
  }
  report.tight = report.sup_at_largest_y < threshold;
  return report;
}

}  // namespace monoclt
