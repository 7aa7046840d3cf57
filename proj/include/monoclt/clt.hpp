#pragma once

// Norming constants, regular-variation diagnostics and CLT experiments for
// scaled monotone powers.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "monoclt/conv.hpp"
#include "monoclt/htransform.hpp"
#include "monoclt/measure.hpp"

namespace monoclt {

enum class NormingProvenance {
  CutoffEq31,          // largest solution of n H(y) = y^2
  SigmaCriterionEq41,  // largest solution of B^2 = n (L_sigma(B) + sigma(R))
  FiniteVariance,      // sqrt(n var)
  NLogN,               // sqrt(n ln n), with B_1 = 1
};

const char* to_string(NormingProvenance p) noexcept;

struct NormingSequence {
  std::vector<double> values;  // values[n - 1] = B_n
  NormingProvenance provenance = NormingProvenance::FiniteVariance;

  double at(std::size_t n) const { return values.at(n - 1); }
  std::size_t size() const noexcept { return values.size(); }
};

enum class NormingMethod { Auto, Cutoff, FiniteVariance };

/// B_1 .. B_N. Auto picks sqrt(n var) when the variance is finite and the
/// cutoff route otherwise. DegenerateMeasure for point masses.
NormingSequence norming_constants(const Measure& m, std::size_t n_max,
                                  NormingMethod method = NormingMethod::Auto);

/// Single constant; same conventions as norming_constants.
double norming_constant(const Measure& m, std::size_t n,
                        NormingMethod method = NormingMethod::Auto);

/// B_n from the sigma criterion of a Nevanlinna pair.
NormingSequence norming_constants(const NevanlinnaRep& rep, std::size_t n_max);

NormingSequence norming_nlogn(std::size_t n_max);

struct SigmaCheck {
  std::vector<double> ratio;  // ratio[n - 1] = r_n
  double max_tail_deviation = 0.0;  // max |r_n - 1| over n >= N / 2
};

/// r_n = n B_n^-2 [L_sigma(B_n y) + sigma(R)].
SigmaCheck norming_check_sigma(const NevanlinnaRep& rep, const NormingSequence& b, double y = 1.0);

struct SlowVariationReport {
  std::vector<double> c;
  std::vector<double> x;
  std::vector<std::vector<double>> ratio;  // ratio[i][j] = f(c_i x_j) / f(x_j)
  double index = 0.0;                      // log-log least squares slope over x
};

SlowVariationReport slow_variation_report(const std::function<double(double)>& f,
                                          const std::vector<double>& c,
                                          const std::vector<double>& x);
/// H of m.
SlowVariationReport slow_variation_report(const Measure& m, const std::vector<double>& c,
                                          const std::vector<double>& x);
/// L of sigma.
SlowVariationReport slow_variation_report(const NevanlinnaRep& rep, const std::vector<double>& c,
                                          const std::vector<double>& x);

/// Least squares slope of log B_n against log n over the given n.
double norming_log_slope(const NormingSequence& b, const std::vector<std::size_t>& ns);

struct CltOptions {
  std::vector<double> ys{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  bool invert = true;
  Grid grid{};
  InversionOptions inversion{};
  bool classical = true;
  std::size_t atom_cap = kDefaultAtomCap;
  // Overrides the default norming route (norming_constant, method Auto).
  std::function<double(std::size_t)> norming;
};

struct CltRow {
  std::size_t n = 0;
  double b = 0.0;
  double sup_deviation = 0.0;                // sup over the z-grid of |F_{mu_n} - F_gamma|
  std::optional<double> ks_arcsine;          // inverted mu_n vs gamma
  std::optional<double> ks_normal;           // classical scaled power vs N(0,1)
  std::string note;                          // why a column is missing
  double runtime_s = 0.0;
};

struct CltReport {
  double center = 0.0;  // the measure was shifted by -center
  std::vector<CltRow> rows;
  bool monotone = true;  // sup deviation nonincreasing up to 20% slack
};

CltReport clt_report(const Measure& m, std::vector<std::size_t> ns, const CltOptions& options = {});

struct ConjugacyTrace {
  cplx lhs;         // F_{mu_n}(sqrt z)^2 by iteration
  cplx telescoped;  // z + sum_j R(F_n^{oj}(sqrt z))
  cplx remainder_sum;
};

/// z must be -y^2 with y > 10 (DomainError otherwise). F_n = F of D_{1/B} m.
ConjugacyTrace conjugacy_trace(const Measure& m, std::size_t n, cplx z, double b);

struct Lemma41Row {
  std::size_t j = 0;
  double deviation = 0.0;  // |F_n^{oj}(iy) - iy|
  double bound = 0.0;      // 10 j / n
  bool violated = false;
};

std::vector<Lemma41Row> lemma41_check(const Measure& m, std::size_t n, double y,
                                      std::vector<std::size_t> js, double b);

struct LlnRow {
  std::size_t n = 0;
  double max_deviation = 0.0;  // over the z list
  std::vector<cplx> deviation;
};

/// (1/n) F^{on}(n z) - (z - mean) per n and z.
std::vector<LlnRow> lln_check(const Measure& m, const std::vector<std::size_t>& ns,
                              const std::vector<cplx>& zs);

}  // namespace monoclt
