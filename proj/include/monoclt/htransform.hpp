#pragma once

// Cauchy transforms, reciprocal Cauchy transforms F = 1/G, and the analytic
// self-maps of the upper half-plane built from them.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "monoclt/measure.hpp"

namespace monoclt {

using cplx = std::complex<double>;

/// F(z) = z + a + integral (1 + t z) / (t - z) d sigma(t), sigma atomic.
struct NevanlinnaRep {
  double a = 0.0;
  AtomicMeasure sigma = AtomicMeasure::empty();
};

struct FreeConvOptions {
  double tol = 1e-13;           // stop when |w_{k+1} - w_k| < tol (1 + |w|)
  std::size_t max_iter = 10000;
  bool newton = true;           // Newton acceleration of the fixed point
};

/// Square root analytic on C \ [0, inf) with sqrt(-1) = i.
cplx sqrt_upper(cplx w);

/// Evaluable analytic self-map of C+. Cheap to copy (shared immutable tree).
class SelfMap {
 public:
  enum class Kind {
    FromMeasure,
    FromNevanlinna,
    Compose,
    Iterate,
    Dilated,
    Arcsine,
    FreeConv,
  };

  static SelfMap identity();
  /// F = 1 / G for a probability measure.
  static SelfMap from_measure(Measure m);
  static SelfMap from_nevanlinna(NevanlinnaRep rep);
  /// maps[0] o maps[1] o ... o maps.back(); the last map is applied first.
  static SelfMap compose(std::vector<SelfMap> maps);
  static SelfMap iterate(SelfMap base, std::size_t n);
  /// z -> b * base(z / b), the map of the dilated measure.
  static SelfMap dilated(SelfMap base, double b);
  /// sqrt(z^2 - 2), the map of the standard arcsine law.
  static SelfMap arcsine();
  static SelfMap free_convolution(SelfMap first, SelfMap second,
                                  FreeConvOptions options = {});

  Kind kind() const noexcept;

  /// Checked evaluation: Im z must be positive; intermediate values more
  /// than 1e-9 below the real axis raise NumericBreakdown.
  cplx operator()(cplx z) const;

  /// Same as operator() over many points, vectorized where the map allows.
  void eval_batch(std::span<const cplx> z, std::span<cplx> out) const;

  struct Node;

 private:
  explicit SelfMap(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// G(z) = integral 1 / (z - t) d m(t). DomainError when Im z <= 0.
cplx cauchy_eval(const Measure& m, cplx z);

cplx f_eval(const SelfMap& map, cplx z);

/// Nevanlinna pair of an atomic probability measure. sigma sits on the k - 1
/// real zeros of G; a point mass at c yields (a = -c, sigma = 0).
NevanlinnaRep nevanlinna_extract(const AtomicMeasure& m);
SelfMap nevanlinna_synthesize(const NevanlinnaRep& rep);

struct Grid {
  double x0 = -4.0;
  double h = 1e-3;
  std::size_t count = 8001;

  static Grid covering(double lo, double hi, double h);
  double x(std::size_t i) const noexcept { return x0 + h * static_cast<double>(i); }
};

struct InversionOptions {
  double eta = 1e-2;
  bool extrapolate = true;  // linear Richardson step with eta and eta / 2
};

/// Stieltjes inversion: density ~ -Im(1 / F(x + i eta)) / pi on the grid.
GridDensity measure_from_map(const SelfMap& map, const Grid& grid,
                             const InversionOptions& options = {});

/// sup |CDF(source) - CDF(target)| over grid nodes, atoms and a dense sample.
/// CoverageError when a grid source misses more than `coverage_tol` of mass
/// or the target puts that much mass outside the grid.
double ks_distance(const Measure& source, const Measure& target,
                   double coverage_tol = 1e-6);

struct TightnessReport {
  // deviation[i][j] = |F_i(i y_j) / (i y_j) - 1|
  std::vector<std::vector<double>> deviation;
  double sup_at_largest_y = 0.0;
  bool tight = false;
};

TightnessReport tightness_stat(std::span<const SelfMap> maps,
                               std::span<const double> ys,
                               double threshold = 0.05);

namespace detail {
// Subordination solve for F_first boxplus F_second at z; defined by the
// convolution engine.
cplx free_convolution_eval(const SelfMap& first, const SelfMap& second,
                           const FreeConvOptions& options, cplx z);
}  // namespace detail

}  // namespace monoclt
