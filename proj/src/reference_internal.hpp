#pragma once

#include "monoclt/measure.hpp"

namespace monoclt::detail {

double point_position(const ReferenceLaw& law);

/// integral of x^k over [lo, hi] (closed) against the law, k in {0, 1, 2}.
double reference_partial(const ReferenceLaw& law, double lo, double hi, int k);

double reference_cdf(const ReferenceLaw& law, double x, bool left_limit);

}  // namespace monoclt::detail
