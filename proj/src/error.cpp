#include "monoclt/error.hpp"

namespace monoclt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NumericBreakdown: return "numeric-breakdown";
    case ErrorKind::DegenerateMeasure: return "degenerate-measure";
    case ErrorKind::CapacityExceeded: return "capacity-exceeded";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::PoleProximity: return "pole-proximity";
    case ErrorKind::EmptySigma: return "empty-sigma";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

}  // namespace monoclt
