#pragma once

// Probability measures and finite positive measures on the real line.

#include <cstddef>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace monoclt {

/// Sentinel for divergent moment integrals.
inline constexpr double kDivergent = std::numeric_limits<double>::infinity();

struct Atom {
  double x = 0.0;
  double mass = 0.0;
};

/// Finite weighted point set with strictly increasing positions.
///
/// Construction sorts the input and merges positions closer than
/// 1e-12 * (1 + |x|). A probability measure must have total mass 1 within
/// 1e-12; finite mode accepts any positive total.
class AtomicMeasure {
 public:
  enum class Mode { Probability, Finite };

  static AtomicMeasure probability(std::vector<Atom> atoms);
  static AtomicMeasure finite(std::vector<Atom> atoms);
  static AtomicMeasure point(double c);
  /// Zero measure (finite mode, no atoms).
  static AtomicMeasure empty();

  std::span<const double> positions() const noexcept { return x_; }
  std::span<const double> masses() const noexcept { return m_; }
  std::vector<Atom> atoms() const;
  std::size_t size() const noexcept { return x_.size(); }
  bool is_empty() const noexcept { return x_.empty(); }
  Mode mode() const noexcept { return mode_; }
  double total_mass() const noexcept { return total_; }

  /// Mass dropped by capacity pruning while this measure was produced.
  double pruned_mass() const noexcept { return pruned_; }

  /// Sum of m t^2 over atoms with |t| <= r, in O(log n).
  double second_moment_within(double r) const;

  /// Smallest |t| among atoms with t != 0, or +inf when there is none.
  double smallest_nonzero_radius() const noexcept;

 private:
  AtomicMeasure(std::vector<double> x, std::vector<double> m, Mode mode,
                double pruned);
  static AtomicMeasure build(std::vector<Atom> atoms, Mode mode, double pruned);

  friend AtomicMeasure classical_convolve(const AtomicMeasure&,
                                          const AtomicMeasure&, std::size_t);

  std::vector<double> x_;
  std::vector<double> m_;
  // |x| sorted ascending with running sums of m t^2, for truncated variances.
  std::vector<double> abs_sorted_;
  std::vector<double> cum_second_;
  Mode mode_ = Mode::Probability;
  double total_ = 0.0;
  double pruned_ = 0.0;
};

/// Density sampled on a uniform grid x_i = x0 + i h.
class GridDensity {
 public:
  GridDensity(double x0, double h, std::vector<double> values,
              double clamped_mass = 0.0);

  double x0() const noexcept { return x0_; }
  double h() const noexcept { return h_; }
  double x(std::size_t i) const noexcept { return x0_ + h_ * static_cast<double>(i); }
  double x_min() const noexcept { return x0_; }
  double x_max() const noexcept { return x(values_.size() - 1); }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Trapezoid integral over the grid.
  double total_mass() const noexcept { return total_; }

  /// Mass removed by clamping negative samples to zero.
  double clamped_mass() const noexcept { return clamped_; }

  /// Trapezoid cumulative integral at each node (first entry 0).
  std::vector<double> cumulative() const;

 private:
  double x0_;
  double h_;
  std::vector<double> values_;
  double total_ = 0.0;
  double clamped_ = 0.0;
};

/// Closed-form laws, optionally moved to `loc + scale * X`.
///
/// PowerTail(alpha) is the symmetric law with density (alpha/2) |t|^(-alpha-1)
/// on |t| >= 1, i.e. tail mass x^(-alpha) beyond x >= 1.
struct ReferenceLaw {
  enum class Kind { Arcsine, Normal, Semicircle, PointMass, PowerTail };
  Kind kind = Kind::Arcsine;
  double param = 0.0;  // c for PointMass, alpha for PowerTail
  double scale = 1.0;
  double loc = 0.0;

  static ReferenceLaw arcsine() { return {Kind::Arcsine}; }
  static ReferenceLaw normal() { return {Kind::Normal}; }
  static ReferenceLaw semicircle() { return {Kind::Semicircle}; }
  static ReferenceLaw point_mass(double c) { return {Kind::PointMass, c}; }
  static ReferenceLaw power_tail(double alpha);
};

struct Measure {
  std::variant<AtomicMeasure, GridDensity, ReferenceLaw> value;

  Measure(AtomicMeasure m) : value(std::move(m)) {}
  Measure(GridDensity g) : value(std::move(g)) {}
  Measure(ReferenceLaw r) : value(r) {}

  bool is_atomic() const noexcept { return std::holds_alternative<AtomicMeasure>(value); }
  const AtomicMeasure& atomic() const { return std::get<AtomicMeasure>(value); }
  const AtomicMeasure* as_atomic() const noexcept { return std::get_if<AtomicMeasure>(&value); }
  const GridDensity* as_grid() const noexcept { return std::get_if<GridDensity>(&value); }
  const ReferenceLaw* as_reference() const noexcept { return std::get_if<ReferenceLaw>(&value); }

  /// Point mass, either as a one-atom measure or a PointMass law.
  bool is_degenerate() const noexcept;
};

struct Moments {
  double mean = 0.0;  // kDivergent when the first moment diverges
  double m2 = 0.0;
  double var = 0.0;
};

Moments moments(const Measure& m);

/// H(x) = integral of t^2 over [-x, x].
double truncated_variance(const Measure& m, double x);

/// L(x) = integral of t^2 x^2 / (t^2 + x^2).
double harmonic_variance(const Measure& m, double x);

/// Mass of {|t| > x}.
double tail(const Measure& m, double x);

/// Mass of (-inf, x]. For atomic measures `left_limit` selects (-inf, x).
double cdf(const Measure& m, double x, bool left_limit = false);

Measure dilate(const Measure& m, double b);
Measure shift(const Measure& m, double c);

AtomicMeasure dilate(const AtomicMeasure& m, double b);
AtomicMeasure shift(const AtomicMeasure& m, double c);

inline constexpr std::size_t kDefaultAtomCap = 2'000'000;

/// Exact classical convolution. When the merged result exceeds `cap` atoms,
/// atoms lighter than 1e-15 are pruned and the rest renormalized; the pruned
/// mass is recorded on the result. Throws CapacityExceeded if pruning is not
/// enough or the pair count is hopeless.
AtomicMeasure classical_convolve(const AtomicMeasure& a, const AtomicMeasure& b,
                                 std::size_t cap = kDefaultAtomCap);

}  // namespace monoclt
