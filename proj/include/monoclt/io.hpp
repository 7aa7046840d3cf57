#pragma once

// JSON and CSV forms of measures, maps and reports.

#include <string>
#include <string_view>
#include <vector>

#include "monoclt/clt.hpp"
#include "monoclt/ergodic.hpp"
#include "monoclt/measure.hpp"

namespace monoclt::io {

inline constexpr int kSchemaVersion = 1;

/// {"type":"atomic","atoms":[[x,w],...]} | {"type":"grid","x0":..,"h":..,
/// "values":[..]} | {"type":"ref","law":"arcsine"|"normal"|"semicircle"|
/// "point"|"power-tail", ...}. Unknown fields raise ValidationError.
std::string to_json(const Measure& m);
Measure measure_from_json(std::string_view text);

/// {"a":..,"sigma":[[t,s],...]}
std::string to_json(const NevanlinnaRep& rep);
NevanlinnaRep rep_from_json(std::string_view text);

/// {"c":..,"poles":[[t,w],...]}
std::string to_json(const RationalBooleMap& map);
RationalBooleMap map_from_json(std::string_view text);

/// Round-trip text of a double (17 significant digits).
std::string fmt(double v);

/// Comma separated table with one header row.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(const std::vector<double>& values);
  Csv& row(const std::vector<std::string>& values);
  std::string str() const;

 private:
  std::size_t width_;
  std::string text_;
};

std::string to_csv(const GridDensity& d);
std::string to_json(const GridDensity& d);

std::string to_csv(const CltReport& r);
std::string to_json(const CltReport& r);

std::string to_csv(const ConservativityReport& r);
std::string to_json(const ConservativityReport& r);

}  // namespace monoclt::io
