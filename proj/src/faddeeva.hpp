#pragma once

#include <complex>

namespace monoclt::detail {

/// Faddeeva function w(z) = exp(-z^2) erfc(-i z) for Im z >= 0, by Weideman's
/// rational expansion (about 1e-14 absolute accuracy in the closed upper
/// half-plane).
std::complex<double> faddeeva(std::complex<double> z);

}  // namespace monoclt::detail
