#pragma once

// Boundary restrictions T(x) = x + c + sum w_k / (t_k - x) of rational inner
// functions, as Lebesgue-preserving maps of the line.

#include <cstddef>
#include <string>
#include <vector>

#include "monoclt/clt.hpp"
#include "monoclt/htransform.hpp"
#include "monoclt/measure.hpp"

namespace monoclt {

struct Pole {
  double t = 0.0;
  double w = 0.0;
};

class RationalBooleMap {
 public:
  /// Poles are sorted; weights must be positive, positions distinct.
  RationalBooleMap(double c, std::vector<Pole> poles);
  /// x -> x + c, the pole-free contrast case.
  static RationalBooleMap translation(double c);

  double c() const noexcept { return c_; }
  std::span<const double> t() const noexcept { return t_; }
  std::span<const double> w() const noexcept { return w_; }
  std::size_t pole_count() const noexcept { return t_.size(); }
  std::vector<Pole> poles() const;

  /// Distance from x to the nearest pole (+inf without poles).
  double pole_distance(double x) const noexcept;

 private:
  double c_ = 0.0;
  std::vector<double> t_;
  std::vector<double> w_;
};

inline constexpr double kPoleGuard = 1e-13;

/// w_k = s_k (1 + t_k^2), c = a - sum s_k t_k. EmptySigma when sigma = 0.
RationalBooleMap boundary_map(const NevanlinnaRep& rep);

/// Inverse canonicalization: the Nevanlinna pair whose boundary map is T.
NevanlinnaRep nevanlinna_of(const RationalBooleMap& map);

/// PoleProximity within 1e-13 of a pole.
double eval_T(const RationalBooleMap& map, double x);
double eval_dT(const RationalBooleMap& map, double x);

struct Preimage {
  double x = 0.0;
  double inv_slope = 0.0;  // 1 / T'(x)
  double residual = 0.0;   // |T(x) - y|
};

/// One solution of T(x) = y per branch, in increasing order.
std::vector<double> preimages(const RationalBooleMap& map, double y);
std::vector<Preimage> preimages_detailed(const RationalBooleMap& map, double y);

/// max over y of |sum_{T x = y} 1/T'(x) - 1|.
double preservation_check(const RationalBooleMap& map, std::span<const double> ys);

/// The probability measure with F = boundary map's analytic extension: atoms
/// at the zeros of T with masses 1/T'. Only zeros with |x| <= radius are
/// located, so for a finite radius the result is a finite measure.
AtomicMeasure zeros_measure(const RationalBooleMap& map, double radius = kDivergent);

struct AaronsonSums {
  std::vector<double> term;     // term[n - 1] = Im(-1 / F^{on}(z))
  std::vector<double> partial;  // partial[n - 1] = s_n
};

AaronsonSums aaronson_sums(const SelfMap& f, std::size_t n_max, cplx z = cplx(0.0, 1.0));
AaronsonSums aaronson_sums(const Measure& m, std::size_t n_max, cplx z = cplx(0.0, 1.0));

struct ModelFit {
  std::string model;  // "log", "loglog", "convergent", "sqrt"
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double rel_rmse = 0.0;
};

/// s ~ alpha ln N + beta, s ~ alpha ln ln N + beta, s ~ alpha - beta N^-gamma.
std::vector<ModelFit> fit_growth_models(const std::vector<double>& n, const std::vector<double>& s);
/// s ~ alpha sqrt(N), no intercept.
ModelFit fit_sqrt(const std::vector<double>& n, const std::vector<double>& s);

/// Geometric checkpoints from `from` to `to`, `per_decade` per factor 10.
std::vector<std::size_t> log_checkpoints(std::size_t from, std::size_t to, std::size_t per_decade = 10);

struct ConservativityReport {
  std::vector<std::size_t> checkpoints;
  std::vector<double> norming_partial;   // sum_{n <= N} 1 / B_n^2
  std::vector<double> aaronson_partial;  // empty unless computed
  std::vector<ModelFit> fits;            // on norming_partial
  std::string best_model;
  bool divergent = false;
  std::string verdict;
  double h_index = 0.0;                  // log-log slope of H over the B_n range
  NormingProvenance provenance = NormingProvenance::FiniteVariance;
};

ConservativityReport conservativity_criterion(const NormingSequence& b,
                                              std::size_t from = 1000);
/// B_n from norming_constants(m); Aaronson sums added for atomic m.
ConservativityReport conservativity_criterion(const Measure& m, std::size_t n_max,
                                              std::size_t from = 1000);

enum class Kernel { Cauchy, Gaussian, Indicator };

struct KernelSpec {
  Kernel kind = Kernel::Cauchy;
  double lo = 0.0;  // indicator interval
  double hi = 1.0;

  double operator()(double x) const noexcept;
  /// Integral over R (closed form).
  double integral() const noexcept;
};

struct HopfResult {
  std::vector<std::size_t> checkpoints;
  std::vector<double> ratio;
  double target = 0.0;
  bool truncated = false;  // orbit hit a pole
  std::size_t steps = 0;
};

HopfResult hopf_ratio(const RationalBooleMap& map, KernelSpec f, KernelSpec g, double x0,
                      std::size_t n_steps, std::vector<std::size_t> checkpoints = {});

struct OrbitRecord {
  double x0 = 0.0;
  std::size_t length = 0;
  std::size_t visits = 0;  // j in 1..length with T^j(x0) in A
  std::vector<std::size_t> bin_counts;
  bool pole_hit = false;
};

struct OrbitOptions {
  double lo = -1.0;  // interval A
  double hi = 1.0;
  std::size_t bins = 0;  // optional histogram of A
};

std::vector<OrbitRecord> occupation_time(const RationalBooleMap& map,
                                         const std::vector<double>& x0s, std::size_t n_steps,
                                         const OrbitOptions& options);

enum class Binning { Symmetrized, Literal };

struct Example310b {
  AtomicMeasure sigma = AtomicMeasure::empty();
  NevanlinnaRep rep;
  SelfMap map = SelfMap::identity();
  RationalBooleMap boundary = RationalBooleMap::translation(0.0);
  NormingSequence b;
  double defect = 0.0;  // sigma mass beyond |k| > K
};

Example310b example_310b(std::size_t k_max, std::size_t n_max, Binning binning = Binning::Symmetrized);

}  // namespace monoclt
