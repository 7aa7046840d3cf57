#pragma once

// Monotone, classical and free convolution.

#include <cstddef>

#include "monoclt/htransform.hpp"
#include "monoclt/measure.hpp"

namespace monoclt {

/// F_{m |> n} = F_m o F_n.
SelfMap monotone_convolve(const Measure& m, const Measure& n);

/// n-fold iterate of F_m; n = 0 is the identity (delta_0).
SelfMap monotone_power(const Measure& m, std::size_t n);

/// z -> (1/B) F_m^{on}(B z), the map of D_{1/B} m^{|> n}.
class ScaledPowerMap {
 public:
  ScaledPowerMap(Measure base, std::size_t n, double b);

  const Measure& base() const noexcept { return base_; }
  std::size_t n() const noexcept { return n_; }
  double b() const noexcept { return b_; }

  cplx operator()(cplx z) const { return map_(z); }
  const SelfMap& map() const noexcept { return map_; }
  operator const SelfMap&() const noexcept { return map_; }

 private:
  Measure base_;
  std::size_t n_;
  double b_;
  SelfMap map_;
};

ScaledPowerMap scaled_monotone_power(const Measure& m, std::size_t n, double b);

/// Same as above but starting from an already built F-map.
SelfMap scaled_power_map(const SelfMap& f, std::size_t n, double b);

/// Exact n-fold classical convolution by repeated doubling.
AtomicMeasure classical_power(const AtomicMeasure& m, std::size_t n,
                              std::size_t cap = kDefaultAtomCap);

struct SubordinationResult {
  cplx omega1;
  cplx value;  // F_first(omega1)
  std::size_t iterations = 0;
};

/// Solves w = z + h_second(z + h_first(w)), h(w) = F(w) - w, from w = z.
/// NonConvergence when the iteration cap is reached.
SubordinationResult subordination_solve(const SelfMap& first, const SelfMap& second,
                                        cplx z, const FreeConvOptions& options = {});

/// F_{m boxplus n}. A point mass on either side reduces to a shift.
SelfMap free_convolve(const Measure& m, const Measure& n, const FreeConvOptions& options = {});

}  // namespace monoclt
