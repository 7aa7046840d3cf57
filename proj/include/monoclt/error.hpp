#pragma once

#include <stdexcept>
#include <string>

namespace monoclt {

enum class ErrorKind {
  Domain,
  NumericBreakdown,
  DegenerateMeasure,
  CapacityExceeded,
  NonConvergence,
  Coverage,
  PoleProximity,
  EmptySigma,
  Validation,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base for every error raised by the library. `kind()` lets callers (the CLI
/// in particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of a numerical procedure, as opposed to bad input.
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::NonConvergence ||
           kind_ == ErrorKind::CapacityExceeded ||
           kind_ == ErrorKind::NumericBreakdown;
  }

 private:
  ErrorKind kind_;
};

#define MONOCLT_DEFINE_ERROR(Name, Kind)                                 \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

MONOCLT_DEFINE_ERROR(DomainError, Domain)
MONOCLT_DEFINE_ERROR(NumericBreakdown, NumericBreakdown)
MONOCLT_DEFINE_ERROR(DegenerateMeasure, DegenerateMeasure)
MONOCLT_DEFINE_ERROR(CapacityExceeded, CapacityExceeded)
MONOCLT_DEFINE_ERROR(NonConvergence, NonConvergence)
MONOCLT_DEFINE_ERROR(CoverageError, Coverage)
MONOCLT_DEFINE_ERROR(PoleProximity, PoleProximity)
MONOCLT_DEFINE_ERROR(EmptySigma, EmptySigma)
MONOCLT_DEFINE_ERROR(ValidationError, Validation)

#undef MONOCLT_DEFINE_ERROR

}  // namespace monoclt
