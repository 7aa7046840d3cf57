#include "monoclt/io.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "monoclt/error.hpp"

namespace monoclt::io {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

void only_fields(const json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ValidationError("unknown field '" + key + "'");
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<Atom> pairs(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ValidationError(std::string("field '") + key + "' must be an array of pairs");
  std::vector<Atom> out;
  for (const json& p : j.at(key)) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ValidationError(std::string("entries of '") + key + "' must be [x, w] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

json pairs_json(std::span<const double> x, std::span<const double> w) {
  json arr = json::array();
  for (std::size_t i = 0; i < x.size(); ++i) arr.push_back({x[i], w[i]});
  return arr;
}

// Non-finite values become null so the output stays valid JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* law_name(ReferenceLaw::Kind k) {
  switch (k) {
    case ReferenceLaw::Kind::Arcsine: return "arcsine";
    case ReferenceLaw::Kind::Normal: return "normal";
    case ReferenceLaw::Kind::Semicircle: return "semicircle";
    case ReferenceLaw::Kind::PointMass: return "point";
    case ReferenceLaw::Kind::PowerTail: return "power-tail";
  }
  return "";
}

std::string dump(const json& j) { return j.dump(); }

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_json(const Measure& m) {
  json j;
  if (const auto* a = m.as_atomic()) {
    j = {{"type", "atomic"}, {"atoms", pairs_json(a->positions(), a->masses())}};
  } else if (const auto* g = m.as_grid()) {
    j = {{"type", "grid"}, {"x0", g->x0()}, {"h", g->h()},
         {"values", std::vector<double>(g->values().begin(), g->values().end())}};
  } else {
    const ReferenceLaw& r = *m.as_reference();
    j = {{"type", "ref"}, {"law", law_name(r.kind)}};
    if (r.kind == ReferenceLaw::Kind::PointMass) j["c"] = r.param;
    if (r.kind == ReferenceLaw::Kind::PowerTail) j["alpha"] = r.param;
    if (r.scale != 1.0) j["scale"] = r.scale;
    if (r.loc != 0.0) j["loc"] = r.loc;
  }
  return dump(j);
}

Measure measure_from_json(std::string_view text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ValidationError("measure needs a string field 'type'");
  const std::string type = j["type"];
  if (type == "atomic") {
    only_fields(j, {"type", "atoms"});
    return AtomicMeasure::probability(pairs(j, "atoms"));
  }
  if (type == "grid") {
    // the summary fields of an exported density are accepted and ignored
    only_fields(j, {"type", "x0", "h", "values", "schema_version", "clamped_mass", "total_mass"});
    if (!j.contains("values") || !j["values"].is_array())
      throw ValidationError("grid needs a 'values' array");
    std::vector<double> v;
    for (const json& x : j["values"]) {
      if (!x.is_number() || x.get<double>() < 0.0)
        throw ValidationError("grid values must be nonnegative numbers");
      v.push_back(x.get<double>());
    }
    const double h = number(j, "h");
    if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
    if (v.size() < 2) throw ValidationError("grid needs at least two values");
    return GridDensity(number(j, "x0"), h, std::move(v));
  }
  if (type == "ref") {
    only_fields(j, {"type", "law", "c", "alpha", "scale", "loc"});
    if (!j.contains("law") || !j["law"].is_string()) throw ValidationError("ref needs 'law'");
    const std::string law = j["law"];
    ReferenceLaw r;
    if (law == "arcsine") r = ReferenceLaw::arcsine();
    else if (law == "normal") r = ReferenceLaw::normal();
    else if (law == "semicircle") r = ReferenceLaw::semicircle();
    else if (law == "point") r = ReferenceLaw::point_mass(number(j, "c"));
    else if (law == "power-tail") r = ReferenceLaw::power_tail(number(j, "alpha"));
    else throw ValidationError("unknown law '" + law + "'");
    if ((j.contains("c") && law != "point") || (j.contains("alpha") && law != "power-tail"))
      throw ValidationError("parameter does not apply to law '" + law + "'");
    if (j.contains("scale")) {
      r.scale = number(j, "scale");
      if (!(r.scale > 0.0)) throw ValidationError("scale must be positive");
    }
    if (j.contains("loc")) r.loc = number(j, "loc");
    return r;
  }
  throw ValidationError("unknown measure type '" + type + "'");
}

std::string to_json(const NevanlinnaRep& rep) {
  return dump({{"a", rep.a}, {"sigma", pairs_json(rep.sigma.positions(), rep.sigma.masses())}});
}

NevanlinnaRep rep_from_json(std::string_view text) {
  const json j = parse(text);
  only_fields(j, {"a", "sigma"});
  return {number(j, "a"), AtomicMeasure::finite(pairs(j, "sigma"))};
}

std::string to_json(const RationalBooleMap& map) {
  return dump({{"c", map.c()}, {"poles", pairs_json(map.t(), map.w())}});
}

RationalBooleMap map_from_json(std::string_view text) {
  const json j = parse(text);
  only_fields(j, {"c", "poles"});
  std::vector<Pole> poles;
  for (const Atom& a : pairs(j, "poles")) poles.push_back({a.x, a.mass});
  return RationalBooleMap(number(j, "c"), std::move(poles));
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

Csv& Csv::row(const std::vector<std::string>& values) {
  if (values.size() != width_) throw ValidationError("CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += values[i];
  }
  text_ += '\n';
  return *this;
}

Csv& Csv::row(const std::vector<double>& values) {
  std::vector<std::string> s;
  s.reserve(values.size());
  for (double v : values) s.push_back(fmt(v));
  return row(s);
}

std::string Csv::str() const { return text_; }

std::string to_csv(const GridDensity& d) {
  Csv csv({"x", "density"});
  for (std::size_t i = 0; i < d.size(); ++i) csv.row(std::vector<double>{d.x(i), d.values()[i]});
  return csv.str();
}

std::string to_json(const GridDensity& d) {
  json j = json::parse(to_json(Measure(d)));
  j["schema_version"] = kSchemaVersion;
  j["clamped_mass"] = d.clamped_mass();
  j["total_mass"] = d.total_mass();
  return dump(j);
}

std::string to_csv(const CltReport& r) {
  Csv csv({"n", "B", "sup_deviation", "ks_arcsine", "ks_normal"});
  const double nan = std::nan("");
  for (const CltRow& row : r.rows)
    csv.row(std::vector<double>{static_cast<double>(row.n), row.b, row.sup_deviation,
                                row.ks_arcsine.value_or(nan), row.ks_normal.value_or(nan)});
  return csv.str();
}

std::string to_json(const CltReport& r) {
  json rows = json::array();
  for (const CltRow& row : r.rows) {
    json o = {{"n", row.n}, {"B", row.b}, {"sup_deviation", row.sup_deviation}};
    o["ks_arcsine"] = row.ks_arcsine ? num(*row.ks_arcsine) : json(nullptr);
    o["ks_normal"] = row.ks_normal ? num(*row.ks_normal) : json(nullptr);
    if (!row.note.empty()) o["note"] = row.note;
    rows.push_back(o);
  }
  return dump({{"schema_version", kSchemaVersion},
               {"center", r.center},
               {"monotone", r.monotone},
               {"rows", rows}});
}

std::string to_csv(const ConservativityReport& r) {
  const bool aar = !r.aaronson_partial.empty();
  std::vector<std::string> head{"N", "norming_partial"};
  if (aar) head.push_back("aaronson_partial");
  Csv csv(head);
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    std::vector<double> v{static_cast<double>(r.checkpoints[i]), r.norming_partial[i]};
    if (aar) v.push_back(r.aaronson_partial[i]);
    csv.row(v);
  }
  return csv.str();
}

std::string to_json(const ConservativityReport& r) {
  json fits = json::array();
  for (const ModelFit& f : r.fits)
    fits.push_back({{"model", f.model}, {"alpha", num(f.alpha)}, {"beta", num(f.beta)},
                    {"gamma", num(f.gamma)}, {"rel_rmse", num(f.rel_rmse)}});
  json j = {{"schema_version", kSchemaVersion},
            {"checkpoints", r.checkpoints},
            {"norming_partial", r.norming_partial},
            {"provenance", to_string(r.provenance)},
            {"fits", fits},
            {"best_model", r.best_model},
            {"divergent", r.divergent},
            {"verdict", r.verdict},
            {"h_index", num(r.h_index)}};
  if (!r.aaronson_partial.empty()) j["aaronson_partial"] = r.aaronson_partial;
  return dump(j);
}

}  // namespace monoclt::io
