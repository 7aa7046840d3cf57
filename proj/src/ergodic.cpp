#include "monoclt/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "monoclt/error.hpp"
#include "monoclt/parallel.hpp"
#include "monoclt/simd/kernels.hpp"

namespace monoclt {

RationalBooleMap::RationalBooleMap(double c, std::vector<Pole> poles) : c_(c) {
  if (!std::isfinite(c)) throw ValidationError("map shift must be finite");
  std::sort(poles.begin(), poles.end(), [](const Pole& a, const Pole& b) { return a.t < b.t; });
  for (std::size_t k = 0; k < poles.size(); ++k) {
    if (!(poles[k].w > 0.0) || !std::isfinite(poles[k].w) || !std::isfinite(poles[k].t))
      throw ValidationError("pole weights must be positive and finite");
    if (k > 0 && poles[k].t == poles[k - 1].t) throw ValidationError("pole positions must be distinct");
    t_.push_back(poles[k].t);
    w_.push_back(poles[k].w);
  }
}

RationalBooleMap RationalBooleMap::translation(double c) { return RationalBooleMap(c, {}); }

std::vector<Pole> RationalBooleMap::poles() const {
  std::vector<Pole> out(t_.size());
  for (std::size_t k = 0; k < t_.size(); ++k) out[k] = {t_[k], w_[k]};
  return out;
}

double RationalBooleMap::pole_distance(double x) const noexcept {
  if (t_.empty()) return kDivergent;
  const auto it = std::lower_bound(t_.begin(), t_.end(), x);
  double d = kDivergent;
  if (it != t_.end()) d = *it - x;
  if (it != t_.begin()) d = std::min(d, x - *(it - 1));
  return d;
}

RationalBooleMap boundary_map(const NevanlinnaRep& rep) {
  if (rep.sigma.is_empty()) throw EmptySigma("sigma = 0: the boundary map is a translation");
  const auto t = rep.sigma.positions();
  const auto s = rep.sigma.masses();
  std::vector<Pole> poles(t.size());
  double st = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    poles[k] = {t[k], s[k] * (1.0 + t[k] * t[k])};
    st += s[k] * t[k];
  }
  return RationalBooleMap(rep.a - st, std::move(poles));
}

NevanlinnaRep nevanlinna_of(const RationalBooleMap& map) {
  std::vector<Atom> atoms;
  double st = 0.0;
  for (std::size_t k = 0; k < map.pole_count(); ++k) {
    const double t = map.t()[k];
    const double s = map.w()[k] / (1.0 + t * t);
    atoms.push_back({t, s});
    st += s * t;
  }
  return {map.c() + st, AtomicMeasure::finite(std::move(atoms))};
}

namespace {

void guard_pole(const RationalBooleMap& map, double x) {
  if (map.pole_distance(x) < kPoleGuard)
    throw PoleProximity("x = " + std::to_string(x) + " is within 1e-13 of a pole");
}

double eval_unchecked(const RationalBooleMap& map, double x) {
  return x + map.c() + simd::pole_sum_real(map.t(), map.w(), x).value;
}

struct LongEval {
  long double value;
  long double slope;
};

LongEval eval_long(const RationalBooleMap& map, long double x) {
  long double v = x + map.c();
  long double s = 1.0L;
  for (std::size_t k = 0; k < map.pole_count(); ++k) {
    const long double inv = 1.0L / (static_cast<long double>(map.t()[k]) - x);
    const long double wk = map.w()[k];
    v += wk * inv;
    s += wk * inv * inv;
  }
  return {v, s};
}

// Safeguarded Newton for an increasing function on (lo, hi) with a sign
// change; the endpoints are never evaluated.
template <class Real, class Eval>
Real solve_branch(Real lo, Real hi, Eval eval, Real y) {
  Real x = lo + (hi - lo) / 2;
  for (int it = 0; it < 400; ++it) {
    const auto e = eval(x);
    const Real f = e.value - y;
    if (f == 0) return x;
    if (f < 0) lo = x;
    else hi = x;
    Real next = x - f / e.slope;
    if (!(next > lo && next < hi)) next = lo + (hi - lo) / 2;
    if (next == x || next <= lo || next >= hi) return x;
    const Real step = next > x ? next - x : x - next;
    x = next;
    const Real scale = 1 + (x < 0 ? -x : x);
    if (step <= 4 * std::numeric_limits<Real>::epsilon() * scale) return x;
  }
  return x;
}

// Brackets for each branch; unbounded ends are expanded until T crosses y.
template <class Real, class Eval>
std::vector<Real> all_branches(const RationalBooleMap& map, Real y, Eval eval) {
  std::vector<Real> roots;
  const std::size_t k = map.pole_count();
  if (k == 0) {
    roots.push_back(y - map.c());
    return roots;
  }
  const Real first = map.t().front();
  const Real last = map.t().back();
  Real d = 1;
  while (eval(first - d).value >= y) d *= 2;
  roots.push_back(solve_branch<Real>(first - d, first, eval, y));
  for (std::size_t i = 0; i + 1 < k; ++i)
    roots.push_back(solve_branch<Real>(map.t()[i], map.t()[i + 1], eval, y));
  d = 1;
  while (eval(last + d).value <= y) d *= 2;
  roots.push_back(solve_branch<Real>(last, last + d, eval, y));
  return roots;
}

}  // namespace

double eval_T(const RationalBooleMap& map, double x) {
  guard_pole(map, x);
  return eval_unchecked(map, x);
}

double eval_dT(const RationalBooleMap& map, double x) {
  guard_pole(map, x);
  return 1.0 + simd::pole_sum_real(map.t(), map.w(), x).slope;
}

std::vector<Preimage> preimages_detailed(const RationalBooleMap& map, double y) {
  if (!std::isfinite(y)) throw DomainError("preimage target must be finite");
  const auto roots = all_branches<long double>(
      map, static_cast<long double>(y), [&](long double x) { return eval_long(map, x); });
  std::vector<Preimage> out;
  out.reserve(roots.size());
  for (long double r : roots) {
    const double x = static_cast<double>(r);
    const LongEval e = eval_long(map, x);
    out.push_back({x, static_cast<double>(1.0L / e.slope),
                   static_cast<double>(std::abs(e.value - static_cast<long double>(y)))});
  }
  return out;
}

std::vector<double> preimages(const RationalBooleMap& map, double y) {
  std::vector<double> out;
  for (const Preimage& p : preimages_detailed(map, y)) out.push_back(p.x);
  return out;
}

double preservation_check(const RationalBooleMap& map, std::span<const double> ys) {
  double worst = 0.0;
  for (double y : ys) {
    long double acc = 0.0L;
    for (const Preimage& p : preimages_detailed(map, y)) acc += p.inv_slope;
    worst = std::max(worst, static_cast<double>(std::abs(acc - 1.0L)));
  }
  return worst;
}

AtomicMeasure zeros_measure(const RationalBooleMap& map, double radius) {
  if (map.pole_count() == 0) return AtomicMeasure::point(-map.c());
  struct Eval {
    const RationalBooleMap* m;
    struct R {
      double value;
      double slope;
    };
    R operator()(double x) const {
      const auto s = simd::pole_sum_real(m->t(), m->w(), x);
      return {x + m->c() + s.value, 1.0 + s.slope};
    }
  } eval{&map};
  const auto t = map.t();
  const std::size_t k = t.size();
  // branch i is (t[i-1], t[i]) with t[-1] = -inf, t[k] = +inf
  const auto first = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.end(), -radius) - t.begin());
  const auto last = static_cast<std::size_t>(
      std::upper_bound(t.begin(), t.end(), radius) - t.begin());
  std::vector<std::size_t> branches;
  for (std::size_t i = first; i <= std::min(last, k); ++i) branches.push_back(i);
  std::vector<Atom> atoms(branches.size());
  std::vector<char> keep(branches.size(), 0);
  parallel_for(branches.size(), 16, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      const std::size_t i = branches[j];
      double lo, hi;
      if (i == 0) {
        double d = 1.0;
        while (eval(t[0] - d).value >= 0.0) d *= 2.0;
        lo = t[0] - d;
        hi = t[0];
      } else if (i == k) {
        double d = 1.0;
        while (eval(t[k - 1] + d).value <= 0.0) d *= 2.0;
        lo = t[k - 1];
        hi = t[k - 1] + d;
      } else {
        lo = t[i - 1];
        hi = t[i];
      }
      const double x = solve_branch<double>(lo, hi, eval, 0.0);
      if (std::abs(x) <= radius) {
        atoms[j] = {x, 1.0 / eval(x).slope};
        keep[j] = 1;
      }
    }
  });
  std::vector<Atom> kept;
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (keep[j]) kept.push_back(atoms[j]);
  if (std::isfinite(radius)) return AtomicMeasure::finite(std::move(kept));
  double total = 0.0;
  for (const Atom& a : kept) total += a.mass;
  if (std::abs(total - 1.0) > 1e-9)
    throw NumericBreakdown("zero masses sum to " + std::to_string(total));
  for (Atom& a : kept) a.mass /= total;
  return AtomicMeasure::probability(std::move(kept));
}

// ---------------------------------------------------------------- Aaronson

AaronsonSums aaronson_sums(const SelfMap& f, std::size_t n_max, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("Aaronson sums need Im z > 0");
  AaronsonSums out;
  out.term.reserve(n_max);
  out.partial.reserve(n_max);
  cplx w = z;
  double acc = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    w = f(w);
    const double term = (-1.0 / w).imag();
    acc += term;
    out.term.push_back(term);
    out.partial.push_back(acc);
  }
  return out;
}

AaronsonSums aaronson_sums(const Measure& m, std::size_t n_max, cplx z) {
  return aaronson_sums(SelfMap::from_measure(m), n_max, z);
}

namespace {

struct LinearFit {
  double alpha = 0.0;
  double beta = 0.0;
  double rel_rmse = kDivergent;
};

// s ~ alpha u + beta
LinearFit fit_linear(const std::vector<double>& u, const std::vector<double>& s) {
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double suu = 0.0, sus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    sus += (u[i] - mu) * (s[i] - ms);
  }
  LinearFit f;
  f.alpha = suu > 0.0 ? sus / suu : 0.0;
  f.beta = ms - f.alpha * mu;
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = (f.alpha * u[i] + f.beta - s[i]) / s[i];
    err += r * r;
  }
  f.rel_rmse = std::sqrt(err / n);
  return f;
}

}  // namespace

std::vector<ModelFit> fit_growth_models(const std::vector<double>& n, const std::vector<double>& s) {
  if (n.size() != s.size() || n.size() < 3) throw ValidationError("growth fit needs >= 3 points");
  std::vector<double> ln, lln;
  for (double v : n) {
    if (!(v > std::numbers::e)) throw ValidationError("growth fit needs checkpoints above e");
    ln.push_back(std::log(v));
    lln.push_back(std::log(std::log(v)));
  }
  std::vector<ModelFit> out;
  const LinearFit a = fit_linear(ln, s);
  out.push_back({"log", a.alpha, a.beta, 0.0, a.rel_rmse});
  const LinearFit b = fit_linear(lln, s);
  out.push_back({"loglog", b.alpha, b.beta, 0.0, b.rel_rmse});

  // alpha - beta N^-gamma: linear in (alpha, beta) for fixed gamma
  auto at = [&](double gamma) {
    std::vector<double> u;
    for (double v : n) u.push_back(-std::pow(v, -gamma));
    const LinearFit f = fit_linear(u, s);
    return ModelFit{"convergent", f.beta, f.alpha, gamma, f.rel_rmse};
  };
  ModelFit best = at(1e-2);
  for (int i = 1; i <= 300; ++i) {
    const ModelFit f = at(1e-2 * std::pow(300.0, i / 300.0));
    if (f.rel_rmse < best.rel_rmse) best = f;
  }
  out.push_back(best);
  return out;
}

ModelFit fit_sqrt(const std::vector<double>& n, const std::vector<double>& s) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    num += std::sqrt(n[i]) * s[i];
    den += n[i];
  }
  ModelFit f{"sqrt", den > 0.0 ? num / den : 0.0, 0.0, 0.0, 0.0};
  double err = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = (f.alpha * std::sqrt(n[i]) - s[i]) / s[i];
    err += r * r;
  }
  f.rel_rmse = std::sqrt(err / static_cast<double>(n.size()));
  return f;
}

std::vector<std::size_t> log_checkpoints(std::size_t from, std::size_t to, std::size_t per_decade) {
  if (from == 0 || to < from || per_decade == 0) throw ValidationError("invalid checkpoint range");
  std::vector<std::size_t> out;
  const double step = std::pow(10.0, 1.0 / static_cast<double>(per_decade));
  for (double v = static_cast<double>(from); v < static_cast<double>(to) * (1.0 - 1e-12); v *= step) {
    const auto n = static_cast<std::size_t>(std::llround(v));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  if (out.empty() || out.back() != to) out.push_back(to);
  return out;
}

ConservativityReport conservativity_criterion(const NormingSequence& b, std::size_t from) {
  ConservativityReport r;
  r.provenance = b.provenance;
  if (b.size() < from) throw ValidationError("horizon is below the first checkpoint");
  r.checkpoints = log_checkpoints(from, b.size());
  double acc = 0.0;
  std::size_t next = 0;
  for (std::size_t n = 1; n <= b.size() && next < r.checkpoints.size(); ++n) {
    acc += 1.0 / (b.at(n) * b.at(n));
    if (n == r.checkpoints[next]) {
      r.norming_partial.push_back(acc);
      ++next;
    }
  }
  std::vector<double> ns(r.checkpoints.begin(), r.checkpoints.end());
  r.fits = fit_growth_models(ns, r.norming_partial);
  const ModelFit& best_div = r.fits[0].rel_rmse <= r.fits[1].rel_rmse ? r.fits[0] : r.fits[1];
  const ModelFit& conv = r.fits[2];
  r.divergent = !(2.0 * conv.rel_rmse < best_div.rel_rmse);
  r.best_model = r.divergent ? best_div.model : conv.model;
  r.verdict = r.divergent
                  ? "criterion satisfied at horizon " + std::to_string(b.size()) + " (model " +
                        best_div.model + ")"
                  : "partial sums fit a convergent model at horizon " + std::to_string(b.size());
  return r;
}

ConservativityReport conservativity_criterion(const Measure& m, std::size_t n_max, std::size_t from) {
  const NormingSequence b = norming_constants(m, n_max);
  ConservativityReport r = conservativity_criterion(b, from);
  std::vector<double> xs;
  for (std::size_t n : r.checkpoints) xs.push_back(b.at(n));
  r.h_index = slow_variation_report(m, {2.0}, xs).index;
  if (m.is_atomic()) {
    const AaronsonSums s = aaronson_sums(m, n_max);
    for (std::size_t n : r.checkpoints) r.aaronson_partial.push_back(s.partial[n - 1]);
  }
  return r;
}

// ---------------------------------------------------------------- orbits

double KernelSpec::operator()(double x) const noexcept {
  switch (kind) {
    case Kernel::Cauchy: return 1.0 / (1.0 + x * x);
    case Kernel::Gaussian: return std::exp(-x * x);
    case Kernel::Indicator: return (x >= lo && x <= hi) ? 1.0 : 0.0;
  }
  return 0.0;
}

double KernelSpec::integral() const noexcept {
  switch (kind) {
    case Kernel::Cauchy: return std::numbers::pi;
    case Kernel::Gaussian: return std::sqrt(std::numbers::pi);
    case Kernel::Indicator: return hi - lo;
  }
  return 0.0;
}

HopfResult hopf_ratio(const RationalBooleMap& map, KernelSpec f, KernelSpec g, double x0,
                      std::size_t n_steps, std::vector<std::size_t> checkpoints) {
  if (f.kind == Kernel::Indicator && !(f.hi > f.lo)) throw ValidationError("empty indicator interval");
  if (g.kind == Kernel::Indicator && !(g.hi > g.lo)) throw ValidationError("empty indicator interval");
  if (checkpoints.empty()) {
    for (std::size_t c = 1000; c < n_steps; c *= 10) checkpoints.push_back(c);
    checkpoints.push_back(n_steps);
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  HopfResult r;
  r.target = f.integral() / g.integral();
  double sf = 0.0, sg = 0.0, x = x0;
  std::size_t next = 0;
  for (std::size_t j = 0; j < n_steps && next < checkpoints.size(); ++j) {
    sf += f(x);
    sg += g(x);
    r.steps = j + 1;
    while (next < checkpoints.size() && checkpoints[next] == j + 1) {
      r.checkpoints.push_back(j + 1);
      r.ratio.push_back(sf / sg);
      ++next;
    }
    if (map.pole_distance(x) < kPoleGuard) {
      r.truncated = true;
      break;
    }
    x = eval_unchecked(map, x);
  }
  return r;
}

std::vector<OrbitRecord> occupation_time(const RationalBooleMap& map,
                                         const std::vector<double>& x0s, std::size_t n_steps,
                                         const OrbitOptions& options) {
  if (!(options.hi > options.lo)) throw ValidationError("occupation interval must be bounded and nonempty");
  std::vector<OrbitRecord> out(x0s.size());
  parallel_for(x0s.size(), 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      OrbitRecord& r = out[i];
      r.x0 = x0s[i];
      r.bin_counts.assign(options.bins, 0);
      double x = x0s[i];
      for (std::size_t j = 0; j < n_steps; ++j) {
        if (map.pole_distance(x) < kPoleGuard) {
          r.pole_hit = true;
          break;
        }
        x = eval_unchecked(map, x);
        ++r.length;
        if (x >= options.lo && x <= options.hi) {
          ++r.visits;
          if (options.bins > 0) {
            auto bin = static_cast<std::size_t>((x - options.lo) / (options.hi - options.lo) *
                                                static_cast<double>(options.bins));
            ++r.bin_counts[std::min(bin, options.bins - 1)];
          }
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------- |t|^-3 example

Example310b example_310b(std::size_t k_max, std::size_t n_max, Binning binning) {
  if (k_max < 10) throw DomainError("the |t|^-3 example needs K >= 10");
  // q_k = nu([k, k + 1)) = (1/2)(k^-2 - (k+1)^-2), written without cancellation
  auto q = [](double k) { return 0.5 * (2.0 * k + 1.0) / (k * k * (k + 1.0) * (k + 1.0)); };
  std::vector<Atom> atoms;
  atoms.reserve(2 * k_max);
  for (std::size_t i = 1; i <= k_max; ++i) {
    const double k = static_cast<double>(i);
    if (binning == Binning::Symmetrized) {
      const double p = i == 1 ? 0.5 * q(1.0) : 0.5 * (q(k) + q(k - 1.0));
      atoms.push_back({k, p});
      atoms.push_back({-k, p});
    } else {
      atoms.push_back({k, q(k)});
      if (i >= 2) atoms.push_back({-k, q(k - 1.0)});
    }
  }
  const double kk = static_cast<double>(k_max);
  Example310b ex;
  ex.defect = 0.5 / ((kk + 1.0) * (kk + 1.0)) + 0.5 / (kk * kk);
  ex.sigma = AtomicMeasure::finite(std::move(atoms));
  ex.rep = {0.0, ex.sigma};
  ex.map = nevanlinna_synthesize(ex.rep);
  ex.boundary = boundary_map(ex.rep);
  ex.b = norming_nlogn(n_max);
  return ex;
}

}  // namespace monoclt
