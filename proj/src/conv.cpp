#include "monoclt/conv.hpp"

#include <cmath>
#include <string>

#include "monoclt/error.hpp"
#include "reference_internal.hpp"

namespace monoclt {

SelfMap monotone_convolve(const Measure& m, const Measure& n) {
  return SelfMap::compose({SelfMap::from_measure(m), SelfMap::from_measure(n)});
}

SelfMap monotone_power(const Measure& m, std::size_t n) {
  if (n == 0) return SelfMap::identity();
  return SelfMap::iterate(SelfMap::from_measure(m), n);
}

SelfMap scaled_power_map(const SelfMap& f, std::size_t n, double b) {
  if (n == 0) throw DomainError("scaled power needs n >= 1");
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("norming constant must be positive");
  SelfMap it = SelfMap::iterate(f, n);
  return b == 1.0 ? it : SelfMap::dilated(std::move(it), 1.0 / b);
}

ScaledPowerMap::ScaledPowerMap(Measure base, std::size_t n, double b)
    : base_(std::move(base)),
      n_(n),
      b_(b),
      map_(scaled_power_map(SelfMap::from_measure(base_), n, b)) {}

ScaledPowerMap scaled_monotone_power(const Measure& m, std::size_t n, double b) {
  return ScaledPowerMap(m, n, b);
}

AtomicMeasure classical_power(const AtomicMeasure& m, std::size_t n, std::size_t cap) {
  if (n == 0) return AtomicMeasure::point(0.0);
  AtomicMeasure result = AtomicMeasure::point(0.0);
  AtomicMeasure square = m;
  bool first = true;
  while (true) {
    if (n & 1U) {
      result = first ? square : classical_convolve(result, square, cap);
      first = false;
    }
    n >>= 1U;
    if (n == 0) break;
    square = classical_convolve(square, square, cap);
  }
  return result;
}

namespace {

bool is_point(const Measure& m, double& c) {
  if (const auto* a = m.as_atomic(); a && a->size() == 1) {
    c = a->positions()[0];
    return true;
  }
  if (const auto* r = m.as_reference(); r && r->kind == ReferenceLaw::Kind::PointMass) {
    c = detail::point_position(*r);
    return true;
  }
  return false;
}

}  // namespace

SubordinationResult subordination_solve(const SelfMap& first, const SelfMap& second, cplx z,
                                        const FreeConvOptions& options) {
  if (!(z.imag() > 0.0)) throw DomainError("subordination needs Im z > 0");
  auto phi = [&](cplx w) {
    const cplx w2 = z + first(w) - w;
    // omega_2 stays in C+ mathematically; guard against roundoff at the axis
    const cplx w2c(w2.real(), std::max(w2.imag(), 0.5 * z.imag()));
    return z + second(w2c) - w2c;
  };
  auto near = [&](cplx a, cplx b) { return std::abs(a - b) < options.tol * (1.0 + std::abs(b)); };

  cplx w = z;
  cplx next = phi(w);
  double damping = 1.0;
  double last_step = std::abs(next - w);
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    cplx candidate = w + damping * (next - w);
    if (options.newton) {
      // derivative of phi by a real finite step; phi is analytic
      const double h = 1e-7 * (1.0 + std::abs(w));
      const cplx slope = (phi(w + h) - next) / h;
      const cplx denom = slope - 1.0;
      if (std::abs(denom) > 1e-12) {
        const cplx trial = w - (next - w) / denom;
        if (trial.imag() >= z.imag()) {
          const cplx trial_next = phi(trial);
          if (std::abs(trial_next - trial) < std::abs(next - w)) {
            if (near(trial_next, trial)) return {trial_next, first(trial_next), it};
            w = trial;
            next = trial_next;
            continue;
          }
        }
      }
    }
    if (near(next, w)) return {next, first(next), it};
    w = candidate;
    const cplx after = phi(w);
    const double step = std::abs(after - w);
    // oscillation: the step length stops shrinking
    if (damping == 1.0 && step > last_step) damping = 0.5;
    last_step = step;
    next = after;
  }
  throw NonConvergence("free convolution fixed point did not converge after " +
                       std::to_string(options.max_iter) + " steps at z = (" +
                       std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
}

namespace detail {
cplx free_convolution_eval(const SelfMap& first, const SelfMap& second,
                           const FreeConvOptions& options, cplx z) {
  return subordination_solve(first, second, z, options).value;
}
}  // namespace detail

SelfMap free_convolve(const Measure& m, const Measure& n, const FreeConvOptions& options) {
  double c = 0.0;
  if (is_point(m, c)) return SelfMap::compose({SelfMap::from_measure(n), SelfMap::from_measure(m)});
  if (is_point(n, c)) return SelfMap::compose({SelfMap::from_measure(m), SelfMap::from_measure(n)});
  return SelfMap::free_convolution(SelfMap::from_measure(m), SelfMap::from_measure(n), options);
}

}  // namespace monoclt
