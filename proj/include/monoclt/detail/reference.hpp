#pragma once

#include <complex>
#include <functional>

#include "monoclt/measure.hpp"

namespace monoclt::detail {

// Expectations E f(X) for a reference law by quadrature adapted to its
// density (Chebyshev-type substitutions for the compact laws, tail-aware
// splits for the others). Point masses evaluate f once.
double expect(const ReferenceLaw& law, const std::function<double(double)>& f);
std::complex<double> expect(
    const ReferenceLaw& law,
    const std::function<std::complex<double>(double)>& f);

/// Density of the law at x (0 for point masses).
double reference_density(const ReferenceLaw& law, double x);

}  // namespace monoclt::detail
