#include "monoclt/clt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "monoclt/error.hpp"

namespace monoclt {

const char* to_string(NormingProvenance p) noexcept {
  switch (p) {
    case NormingProvenance::CutoffEq31: return "cutoff";
    case NormingProvenance::SigmaCriterionEq41: return "sigma-criterion";
    case NormingProvenance::FiniteVariance: return "finite-variance";
    case NormingProvenance::NLogN: return "n-log-n";
  }
  return "unknown";
}

namespace {

constexpr double kBisectRel = 1e-10;

// Exact cutoff constants for an atomic measure. H is a step function with
// jumps at the distinct radii a_k; on [a_k, a_{k+1}) the equation n H = y^2
// has its largest solution sqrt(n H_k) when that is >= a_k. The largest
// admissible k wins, and it is found by binary search on suffix minima of
// the thresholds a_k^2 / H_k.
class AtomicCutoff {
 public:
  explicit AtomicCutoff(const AtomicMeasure& m) : fallback_(m.smallest_nonzero_radius()) {
    std::vector<std::pair<double, double>> r;
    r.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double x = m.positions()[i];
      if (x != 0.0) r.emplace_back(std::abs(x), m.masses()[i] * x * x);
    }
    std::sort(r.begin(), r.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      acc += r[i].second;
      if (i + 1 < r.size() && r[i + 1].first == r[i].first) continue;
      h_.push_back(acc);
      threshold_.push_back(r[i].first * r[i].first / acc);
    }
    suffix_min_.resize(threshold_.size());
    double run = kDivergent;
    for (std::size_t k = threshold_.size(); k-- > 0;) {
      run = std::min(run, threshold_[k]);
      suffix_min_[k] = run;
    }
  }

  double operator()(double n) const {
    const auto it = std::upper_bound(suffix_min_.begin(), suffix_min_.end(), n);
    if (it == suffix_min_.begin()) return fallback_;
    const auto k = static_cast<std::size_t>(it - suffix_min_.begin()) - 1;
    return std::sqrt(n * h_[k]);
  }

 private:
  std::vector<double> h_;
  std::vector<double> threshold_;
  std::vector<double> suffix_min_;
  double fallback_;
};

// inf { y : H(y) > 0 }, the fallback when n H(y) < y^2 for every y (small n).
// Matches the smallest-radius fallback of the atomic route.
double support_edge(const Measure& m, double hi) {
  double lo = 0.0;
  for (int i = 0; !(truncated_variance(m, hi) > 0.0); ++i) {
    if (i > 2000) throw NonConvergence("truncated variance vanishes");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > kBisectRel * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_variance(m, mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

// Largest root of phi(y) = n H(y) - y^2 for continuous H, by bracketing and
// bisection.
double cutoff_generic(const Measure& m, double n, double m2) {
  auto phi = [&](double y) { return n * truncated_variance(m, y) - y * y; };
  double hi = 1.0;
  if (std::isfinite(m2)) {
    hi = std::sqrt(n * m2) * 1.01 + 1e-300;
  } else {
    // Scan upward; 64 doublings past the last nonnegative point end it, as
    // H grows slower than y^2 for the laws handled here.
    double last = 0.0;
    for (int quiet = 0, steps = 0; quiet < 64; hi *= 2.0, ++steps) {
      if (steps > 2000) throw NonConvergence("cutoff bracket did not close");
      if (phi(hi) >= 0.0) {
        last = hi;
        quiet = 0;
      } else {
        ++quiet;
      }
    }
    hi = last > 0.0 ? 2.0 * last : 1.0;
  }
  int guard = 0;
  while (phi(hi) >= 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw NonConvergence("cutoff bracket did not close");
  }
  double lo = hi;
  guard = 0;
  do {
    lo *= 0.5;
    if (++guard > 200) return support_edge(m, hi);
  } while (phi(lo) < 0.0);
  while (hi - lo > kBisectRel * hi) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) >= 0.0) lo = mid;
    else hi = mid;
  }
  return lo;
}

void require_nondegenerate(const Measure& m) {
  if (m.is_degenerate()) throw DegenerateMeasure("norming constants are undefined for a point mass");
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

NormingSequence norming_constants(const Measure& m, std::size_t n_max, NormingMethod method) {
  require_nondegenerate(m);
  NormingSequence out;
  out.values.resize(n_max);
  const Moments mo = moments(m);
  if (method == NormingMethod::Auto)
    method = std::isfinite(mo.var) ? NormingMethod::FiniteVariance : NormingMethod::Cutoff;
  if (method == NormingMethod::FiniteVariance) {
    if (!std::isfinite(mo.var) || !(mo.var > 0.0))
      throw DomainError("finite-variance norming needs 0 < var < inf");
    out.provenance = NormingProvenance::FiniteVariance;
    for (std::size_t n = 1; n <= n_max; ++n) out.values[n - 1] = std::sqrt(n * mo.var);
    return out;
  }
  out.provenance = NormingProvenance::CutoffEq31;
  if (const auto* a = m.as_atomic()) {
    const AtomicCutoff cut(*a);
    for (std::size_t n = 1; n <= n_max; ++n) out.values[n - 1] = cut(static_cast<double>(n));
  } else {
    for (std::size_t n = 1; n <= n_max; ++n)
      out.values[n - 1] = cutoff_generic(m, static_cast<double>(n), mo.m2);
  }
  return out;
}

double norming_constant(const Measure& m, std::size_t n, NormingMethod method) {
  require_nondegenerate(m);
  if (n == 0) throw DomainError("norming constants start at n = 1");
  const Moments mo = moments(m);
  if (method == NormingMethod::Auto)
    method = std::isfinite(mo.var) ? NormingMethod::FiniteVariance : NormingMethod::Cutoff;
  if (method == NormingMethod::FiniteVariance) {
    if (!std::isfinite(mo.var) || !(mo.var > 0.0))
      throw DomainError("finite-variance norming needs 0 < var < inf");
    return std::sqrt(static_cast<double>(n) * mo.var);
  }
  if (const auto* a = m.as_atomic()) return AtomicCutoff(*a)(static_cast<double>(n));
  return cutoff_generic(m, static_cast<double>(n), mo.m2);
}

NormingSequence norming_constants(const NevanlinnaRep& rep, std::size_t n_max) {
  const double total = rep.sigma.total_mass();
  if (!(total > 0.0)) throw EmptySigma("sigma criterion needs sigma != 0");
  const Measure sigma(rep.sigma);
  NormingSequence out;
  out.provenance = NormingProvenance::SigmaCriterionEq41;
  out.values.resize(n_max);
  double prev = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    // g(B) = n (L(B) + S) / B^2 - 1 is decreasing; B_n grows with n
    auto g = [&](double b) { return nn * (harmonic_variance(sigma, b) + total) / (b * b) - 1.0; };
    double lo = std::max(std::sqrt(nn * total), prev * std::sqrt(nn / std::max(1.0, nn - 1.0)));
    double hi = lo * 1.5;
    while (g(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
    }
    while (hi - lo > 1e-12 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    prev = 0.5 * (lo + hi);
    out.values[n - 1] = prev;
  }
  return out;
}

NormingSequence norming_nlogn(std::size_t n_max) {
  NormingSequence out;
  out.provenance = NormingProvenance::NLogN;
  out.values.resize(n_max);
  out.values[0] = 1.0;
  for (std::size_t n = 2; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    out.values[n - 1] = std::sqrt(nn * std::log(nn));
  }
  return out;
}

SigmaCheck norming_check_sigma(const NevanlinnaRep& rep, const NormingSequence& b, double y) {
  if (!(y > 0.0)) throw DomainError("sigma check needs y > 0");
  const Measure sigma(rep.sigma);
  const double total = rep.sigma.total_mass();
  SigmaCheck out;
  out.ratio.resize(b.size());
  for (std::size_t n = 1; n <= b.size(); ++n) {
    const double bn = b.at(n);
    const double l = rep.sigma.is_empty() ? 0.0 : harmonic_variance(sigma, bn * y);
    out.ratio[n - 1] = static_cast<double>(n) / (bn * bn) * (l + total);
    if (2 * n >= b.size())
      out.max_tail_deviation = std::max(out.max_tail_deviation, std::abs(out.ratio[n - 1] - 1.0));
  }
  return out;
}

SlowVariationReport slow_variation_report(const std::function<double(double)>& f,
                                          const std::vector<double>& c,
                                          const std::vector<double>& x) {
  SlowVariationReport r{c, x, {}, 0.0};
  std::vector<double> fx(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    fx[j] = f(x[j]);
    if (!(fx[j] > 0.0)) throw DomainError("slow-variation diagnostic needs f > 0");
  }
  for (double ci : c) {
    std::vector<double> row;
    for (std::size_t j = 0; j < x.size(); ++j) row.push_back(f(ci * x[j]) / fx[j]);
    r.ratio.push_back(std::move(row));
  }
  if (x.size() >= 2) {
    std::vector<double> lx, lf;
    for (std::size_t j = 0; j < x.size(); ++j) {
      lx.push_back(std::log(x[j]));
      lf.push_back(std::log(fx[j]));
    }
    r.index = lsq_slope(lx, lf);
  }
  return r;
}

SlowVariationReport slow_variation_report(const Measure& m, const std::vector<double>& c,
                                          const std::vector<double>& x) {
  return slow_variation_report([&](double t) { return truncated_variance(m, t); }, c, x);
}

SlowVariationReport slow_variation_report(const NevanlinnaRep& rep, const std::vector<double>& c,
                                          const std::vector<double>& x) {
  const Measure sigma(rep.sigma);
  return slow_variation_report([&](double t) { return harmonic_variance(sigma, t); }, c, x);
}

double norming_log_slope(const NormingSequence& b, const std::vector<std::size_t>& ns) {
  std::vector<double> lx, ly;
  for (std::size_t n : ns) {
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(b.at(n)));
  }
  return lsq_slope(lx, ly);
}

// ---------------------------------------------------------------- report

CltReport clt_report(const Measure& m, std::vector<std::size_t> ns, const CltOptions& options) {
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (!ns.empty() && ns.front() == 0) throw ValidationError("n must be positive");
  CltReport report;
  const Moments mo = moments(m);
  report.center = std::isfinite(mo.mean) ? mo.mean : 0.0;
  const Measure centered = report.center != 0.0 ? shift(m, -report.center) : m;
  const SelfMap f = SelfMap::from_measure(centered);
  const SelfMap gamma = SelfMap::arcsine();

  for (std::size_t n : ns) {
    const auto t0 = std::chrono::steady_clock::now();
    CltRow row;
    row.n = n;
    row.b = options.norming ? options.norming(n) : norming_constant(centered, n);
    const SelfMap fn = scaled_power_map(f, n, row.b);
    for (double y : options.ys) {
      const cplx z(0.0, y);
      row.sup_deviation = std::max(row.sup_deviation, std::abs(fn(z) - gamma(z)));
    }
    if (options.invert) {
      const GridDensity d = measure_from_map(fn, options.grid, options.inversion);
      try {
        row.ks_arcsine = ks_distance(Measure(d), ReferenceLaw::arcsine());
      } catch (const CoverageError& e) {
        row.note += std::string("ks-arcsine omitted: ") + e.what() + "; ";
      }
    }
    if (options.classical) {
      if (const auto* a = centered.as_atomic()) {
        try {
          const AtomicMeasure p = dilate(classical_power(*a, n, options.atom_cap), 1.0 / row.b);
          row.ks_normal = ks_distance(Measure(p), ReferenceLaw::normal());
        } catch (const CapacityExceeded& e) {
          row.note += std::string("classical omitted: ") + e.what() + "; ";
        }
      }
    }
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rows.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (report.rows[i].sup_deviation > 1.2 * report.rows[i - 1].sup_deviation)
      report.monotone = false;
  return report;
}

// ---------------------------------------------------------------- proof checks

ConjugacyTrace conjugacy_trace(const Measure& m, std::size_t n, cplx z, double b) {
  const double y2 = -z.real();
  if (std::abs(z.imag()) > 1e-12 * (1.0 + y2) || !(y2 > 100.0))
    throw DomainError("conjugacy trace needs z = -y^2 with y > 10");
  if (n == 0) throw DomainError("conjugacy trace needs n >= 1");
  const cplx w0(0.0, std::sqrt(y2));
  const SelfMap fn = SelfMap::dilated(SelfMap::from_measure(m), 1.0 / b);

  ConjugacyTrace out;
  const cplx last = scaled_power_map(SelfMap::from_measure(m), n, b)(w0);
  out.lhs = last * last;
  cplx w = w0;
  cplx sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx next = fn(w);
    const cplx e = next - w;
    sum += 2.0 * w * e + e * e;
    w = next;
  }
  out.remainder_sum = sum;
  out.telescoped = z + sum;
  return out;
}

std::vector<Lemma41Row> lemma41_check(const Measure& m, std::size_t n, double y,
                                      std::vector<std::size_t> js, double b) {
  if (!(y > 0.0)) throw DomainError("lemma check needs y > 0");
  std::sort(js.begin(), js.end());
  if (!js.empty() && js.back() > n) throw DomainError("j must lie in [0, n]");
  const SelfMap fn = SelfMap::dilated(SelfMap::from_measure(m), 1.0 / b);
  const cplx start(0.0, y);
  cplx w = start;
  std::size_t j = 0;
  std::vector<Lemma41Row> rows;
  for (std::size_t target : js) {
    for (; j < target; ++j) w = fn(w);
    Lemma41Row r;
    r.j = target;
    r.deviation = std::abs(w - start);
    r.bound = 10.0 * static_cast<double>(target) / static_cast<double>(n);
    r.violated = r.deviation > r.bound;
    rows.push_back(r);
  }
  return rows;
}

std::vector<LlnRow> lln_check(const Measure& m, const std::vector<std::size_t>& ns,
                              const std::vector<cplx>& zs) {
  const double mean = moments(m).mean;
  if (!std::isfinite(mean)) throw DomainError("law of large numbers check needs a finite mean");
  const SelfMap f = SelfMap::from_measure(m);
  std::vector<LlnRow> rows;
  for (std::size_t n : ns) {
    const SelfMap fn = scaled_power_map(f, n, static_cast<double>(n));
    LlnRow r;
    r.n = n;
    for (cplx z : zs) {
      r.deviation.push_back(fn(z) - (z - mean));
      r.max_deviation = std::max(r.max_deviation, std::abs(r.deviation.back()));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace monoclt
