// monoclt: command-line front end for the convolution and ergodic experiments.
//
// Every subcommand reads its parameters from inline flags, a JSON config
// (--config), or both (flags win), writes one artifact named
// <subcommand>-<hash>.<csv|json> and a manifest next to it.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monoclt/clt.hpp"
#include "monoclt/conv.hpp"
#include "monoclt/ergodic.hpp"
#include "monoclt/error.hpp"
#include "monoclt/htransform.hpp"
#include "monoclt/io.hpp"
#include "monoclt/simd/kernels.hpp"

#ifndef MONOCLT_VERSION
#define MONOCLT_VERSION "0.0.0"
#endif

using nlohmann::json;
using namespace monoclt;

namespace {

enum class Type { Int, Real, Str, Bool, IntList, RealList };

struct OptSpec {
  std::string name;
  Type type;
  json fallback;
  std::string help;
};

struct Output {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  json summary = json::object();
  std::string json_override;  // artifact body for --format json, if set
};

using Handler = std::function<Output(const json&)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<OptSpec> options;
  Handler run;
};

// ---------------------------------------------------------------- config

const char* type_label(Type t) {
  switch (t) {
    case Type::Int: return "INT";
    case Type::Real: return "REAL";
    case Type::Str: return "TEXT";
    case Type::Bool: return "BOOL";
    case Type::IntList: return "INT,...";
    case Type::RealList: return "REAL,...";
  }
  return "TEXT";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_real(const std::string& s, const std::string& name) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("--" + name + ": '" + s + "' is not a number");
  }
}

long long parse_int(const std::string& s, const std::string& name) {
  const double v = parse_real(s, name);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    throw ValidationError("--" + name + ": '" + s + "' is not an integer");
  return static_cast<long long>(v);
}

json parse_flag(const OptSpec& o, const std::string& raw) {
  switch (o.type) {
    case Type::Int: return parse_int(raw, o.name);
    case Type::Real: return parse_real(raw, o.name);
    case Type::Str: return raw;
    case Type::Bool:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ValidationError("--" + o.name + ": expected true or false");
    case Type::IntList: {
      json a = json::array();
      for (const auto& p : split(raw, ',')) a.push_back(parse_int(p, o.name));
      return a;
    }
    case Type::RealList: {
      json a = json::array();
      for (const auto& p : split(raw, ',')) a.push_back(parse_real(p, o.name));
      return a;
    }
  }
  return nullptr;
}

void check_type(const OptSpec& o, const json& v) {
  auto bad = [&] { throw ValidationError("config field '" + o.name + "' has the wrong type"); };
  switch (o.type) {
    case Type::Int:
      if (!v.is_number_integer()) bad();
      break;
    case Type::Real:
      if (!v.is_number()) bad();
      break;
    case Type::Str:
      // measures and maps may be given inline as objects
      if (!v.is_string() && !v.is_object()) bad();
      break;
    case Type::Bool:
      if (!v.is_boolean()) bad();
      break;
    case Type::IntList:
      if (!v.is_array()) bad();
      for (const auto& e : v)
        if (!e.is_number_integer()) bad();
      break;
    case Type::RealList:
      if (!v.is_array()) bad();
      for (const auto& e : v)
        if (!e.is_number()) bad();
      break;
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- accessors

long long get_int(const json& c, const char* k) { return c.at(k).get<long long>(); }
double get_real(const json& c, const char* k) { return c.at(k).get<double>(); }
bool get_bool(const json& c, const char* k) { return c.at(k).get<bool>(); }
std::string get_str(const json& c, const char* k) {
  const json& v = c.at(k);
  return v.is_string() ? v.get<std::string>() : v.dump();
}
std::vector<double> get_reals(const json& c, const char* k) {
  return c.at(k).get<std::vector<double>>();
}
std::vector<std::size_t> get_counts(const json& c, const char* k) {
  std::vector<std::size_t> out;
  for (long long v : c.at(k).get<std::vector<long long>>()) {
    if (v <= 0) throw ValidationError(std::string("--") + k + " entries must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::size_t positive(const json& c, const char* k) {
  const long long v = get_int(c, k);
  if (v <= 0) throw ValidationError(std::string("--") + k + " must be positive");
  return static_cast<std::size_t>(v);
}

double positive_real(const json& c, const char* k) {
  const double v = get_real(c, k);
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string("--") + k + " must be positive");
  return v;
}

// ---------------------------------------------------------------- inputs

struct MeasureInput {
  Measure measure;
  std::optional<NevanlinnaRep> rep;
};

MeasureInput resolve_measure(const std::string& spec, std::size_t k) {
  if (spec == "boole") return {AtomicMeasure::probability({{-1.0, 0.5}, {1.0, 0.5}}), {}};
  if (spec == "bern01") return {AtomicMeasure::probability({{0.0, 0.5}, {1.0, 0.5}}), {}};
  if (spec == "arcsine") return {ReferenceLaw::arcsine(), {}};
  if (spec == "normal") return {ReferenceLaw::normal(), {}};
  if (spec == "semicircle") return {ReferenceLaw::semicircle(), {}};
  if (spec == "ex310b") {
    const Example310b ex = example_310b(k, 1);
    return {zeros_measure(ex.boundary), ex.rep};
  }
  if (spec.rfind("point:", 0) == 0)
    return {ReferenceLaw::point_mass(parse_real(spec.substr(6), "measure")), {}};
  if (spec.rfind("power-tail:", 0) == 0)
    return {ReferenceLaw::power_tail(parse_real(spec.substr(11), "measure")), {}};
  if (!spec.empty() && spec.front() == '{') return {io::measure_from_json(spec), {}};
  if (std::filesystem::exists(spec)) return {io::measure_from_json(read_file(spec)), {}};
  throw ValidationError("unknown measure '" + spec + "'");
}

RationalBooleMap resolve_map(const std::string& spec, std::size_t k) {
  if (spec == "boole") return RationalBooleMap(0.0, {{0.0, 1.0}});
  if (spec == "ex310b") return example_310b(k, 1).boundary;
  std::string text = spec;
  if (spec.empty() || spec.front() != '{') {
    if (spec.rfind("translation:", 0) == 0)
      return RationalBooleMap::translation(parse_real(spec.substr(12), "map"));
    if (std::filesystem::exists(spec)) text = read_file(spec);
  }
  if (!text.empty() && text.front() == '{') {
    const json j = json::parse(text, nullptr, false);
    if (j.is_object() && j.contains("c")) return io::map_from_json(text);
    if (j.is_object() && j.contains("a")) return boundary_map(io::rep_from_json(text));
  }
  const MeasureInput m = resolve_measure(spec, k);
  if (m.rep) return boundary_map(*m.rep);
  if (!m.measure.is_atomic()) throw ValidationError("boundary maps need an atomic measure");
  return boundary_map(nevanlinna_extract(m.measure.atomic()));
}

Grid grid_of(const json& c) {
  const double lo = get_real(c, "x-min");
  const double hi = get_real(c, "x-max");
  const double h = positive_real(c, "dx");
  if (!(hi > lo)) throw ValidationError("--x-max must exceed --x-min");
  return Grid::covering(lo, hi, h);
}

InversionOptions inversion_of(const json& c) {
  return {positive_real(c, "eta"), get_bool(c, "extrapolate")};
}

std::vector<OptSpec> grid_options(double lo, double hi, double h) {
  return {{"x-min", Type::Real, lo, "left end of the inversion grid"},
          {"x-max", Type::Real, hi, "right end of the inversion grid"},
          {"dx", Type::Real, h, "grid spacing"},
          {"eta", Type::Real, 1e-2, "inversion height"},
          {"extrapolate", Type::Bool, true, "Richardson step over eta and eta/2"}};
}

double norming_for(const MeasureInput& in, const Measure& centered, std::size_t n,
                   const std::string& method) {
  if (method == "nlogn") return n < 2 ? 1.0 : std::sqrt(n * std::log(static_cast<double>(n)));
  if (method == "cutoff") return norming_constant(centered, n, NormingMethod::Cutoff);
  if (method == "finite-variance") return norming_constant(centered, n, NormingMethod::FiniteVariance);
  if (method == "sigma") {
    if (!in.rep) throw ValidationError("sigma norming needs a measure with a Nevanlinna pair");
    return norming_constants(*in.rep, n).at(n);
  }
  if (method == "auto") return norming_constant(centered, n);
  throw ValidationError("unknown norming method '" + method + "'");
}

Measure centered_of(const Measure& m) {
  const double mean = moments(m).mean;
  return std::isfinite(mean) && mean != 0.0 ? shift(m, -mean) : m;
}

cplx z_of(const json& c) {
  const cplx z(get_real(c, "z-re"), get_real(c, "z-im"));
  if (!(z.imag() > 0.0)) throw ValidationError("--z-im must be positive");
  return z;
}

KernelSpec kernel_of(const std::string& name, double lo, double hi) {
  if (name == "cauchy") return {Kernel::Cauchy};
  if (name == "gaussian") return {Kernel::Gaussian};
  if (name == "indicator") {
    if (!(hi > lo)) throw ValidationError("indicator interval must be nonempty");
    return {Kernel::Indicator, lo, hi};
  }
  throw ValidationError("unknown kernel '" + name + "'");
}

// ---------------------------------------------------------------- commands

Output cmd_moments(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const Moments mo = moments(in.measure);
  Output out;
  out.columns = {"x", "truncated_variance", "harmonic_variance", "tail"};
  for (double x : get_reals(c, "x")) {
    if (!(x > 0.0)) throw ValidationError("--x entries must be positive");
    out.rows.push_back({x, truncated_variance(in.measure, x), harmonic_variance(in.measure, x),
                        tail(in.measure, x)});
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  out.summary = {{"mean", num(mo.mean)}, {"m2", num(mo.m2)}, {"var", num(mo.var)}};
  return out;
}

Output cmd_norming(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const std::size_t n_max = positive(c, "N");
  const std::string method = get_str(c, "method");
  const Measure centered = centered_of(in.measure);
  NormingSequence b;
  if (method == "nlogn") b = norming_nlogn(n_max);
  else if (method == "sigma") {
    if (!in.rep) throw ValidationError("sigma norming needs a measure with a Nevanlinna pair");
    b = norming_constants(*in.rep, n_max);
  } else if (method == "cutoff") b = norming_constants(centered, n_max, NormingMethod::Cutoff);
  else if (method == "finite-variance")
    b = norming_constants(centered, n_max, NormingMethod::FiniteVariance);
  else if (method == "auto") b = norming_constants(centered, n_max);
  else throw ValidationError("unknown norming method '" + method + "'");

  std::optional<NevanlinnaRep> rep = in.rep;
  if (!rep && centered.is_atomic() && centered.atomic().size() <= 4096)
    rep = nevanlinna_extract(centered.atomic());
  Output out;
  out.columns = {"n", "B"};
  std::optional<SigmaCheck> check;
  if (rep && !rep->sigma.is_empty()) {
    check = norming_check_sigma(*rep, b);
    out.columns.push_back("r");
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::vector<double> row{static_cast<double>(n), b.at(n)};
    if (check) row.push_back(check->ratio[n - 1]);
    out.rows.push_back(row);
  }
  out.summary = {{"provenance", to_string(b.provenance)}};
  if (check) out.summary["max_tail_deviation"] = check->max_tail_deviation;
  if (n_max >= 10) {
    std::vector<std::size_t> ns;
    for (std::size_t n = std::max<std::size_t>(2, n_max / 100); n <= n_max; n *= 2) ns.push_back(n);
    if (ns.size() >= 2) out.summary["log_slope"] = norming_log_slope(b, ns);
  }
  return out;
}

Output cmd_clt_report(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  CltOptions opt;
  opt.ys = get_reals(c, "y");
  for (double y : opt.ys)
    if (!(y > 0.0)) throw ValidationError("--y entries must be positive");
  opt.invert = get_bool(c, "invert");
  opt.classical = get_bool(c, "classical");
  opt.grid = grid_of(c);
  opt.inversion = inversion_of(c);
  const std::string method = get_str(c, "norming");
  const Measure centered = centered_of(in.measure);
  opt.norming = [&](std::size_t n) { return norming_for(in, centered, n, method); };
  const CltReport r = clt_report(in.measure, get_counts(c, "n"), opt);
  Output out;
  out.columns = {"n", "B", "sup_deviation", "ks_arcsine", "ks_normal"};
  const double nan = std::nan("");
  json runtimes = json::array();
  json notes = json::array();
  for (const CltRow& row : r.rows) {
    out.rows.push_back({static_cast<double>(row.n), row.b, row.sup_deviation,
                        row.ks_arcsine.value_or(nan), row.ks_normal.value_or(nan)});
    runtimes.push_back(row.runtime_s);
    notes.push_back(row.note);
  }
  out.json_override = io::to_json(r);
  out.summary = {{"center", r.center}, {"monotone", r.monotone}, {"notes", notes},
                 {"runtime_s", runtimes}};
  return out;
}

Output cmd_conjugacy(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const Measure m = centered_of(in.measure);
  const std::size_t n = positive(c, "n");
  double b = get_real(c, "B");
  if (b <= 0.0) b = norming_constant(m, n);
  Output out;
  out.columns = {"y", "lhs_re", "lhs_im", "telescoped_re", "telescoped_im", "abs_diff",
                 "remainder_re", "remainder_im"};
  for (double y : get_reals(c, "y")) {
    if (!(y > 10.0)) throw ValidationError("--y entries must exceed 10");
    const ConjugacyTrace t = conjugacy_trace(m, n, cplx(-y * y, 0.0), b);
    out.rows.push_back({y, t.lhs.real(), t.lhs.imag(), t.telescoped.real(), t.telescoped.imag(),
                        std::abs(t.lhs - t.telescoped), t.remainder_sum.real(),
                        t.remainder_sum.imag()});
  }
  out.summary = {{"B", b}};
  return out;
}

Output cmd_invert(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const std::size_t n = positive(c, "n");
  const Grid grid = grid_of(c);
  const InversionOptions inv = inversion_of(c);
  const Measure m = get_bool(c, "center") ? centered_of(in.measure) : in.measure;
  double b = get_real(c, "B");
  if (b <= 0.0) b = n == 1 ? 1.0 : norming_constant(m, n);
  const GridDensity d = measure_from_map(scaled_power_map(SelfMap::from_measure(m), n, b), grid, inv);
  Output out;
  out.columns = {"x", "density"};
  for (std::size_t i = 0; i < d.size(); ++i) out.rows.push_back({d.x(i), d.values()[i]});
  out.summary = {{"B", b}, {"total_mass", d.total_mass()}, {"clamped_mass", d.clamped_mass()}};
  const std::string target = get_str(c, "target");
  if (!target.empty())
    out.summary["ks"] = ks_distance(Measure(d), resolve_measure(target, positive(c, "K")).measure);
  return out;
}

Output cmd_free_conv(const json& c) {
  const std::size_t k = positive(c, "K");
  const Measure a = resolve_measure(get_str(c, "first"), k).measure;
  const Measure b = resolve_measure(get_str(c, "second"), k).measure;
  FreeConvOptions fo;
  fo.tol = positive_real(c, "tol");
  fo.max_iter = positive(c, "max-iter");
  fo.newton = get_bool(c, "newton");
  const Grid grid = grid_of(c);
  const InversionOptions inv = inversion_of(c);
  const GridDensity d = measure_from_map(free_convolve(a, b, fo), grid, inv);
  Output out;
  out.columns = {"x", "density"};
  for (std::size_t i = 0; i < d.size(); ++i) out.rows.push_back({d.x(i), d.values()[i]});
  out.summary = {{"total_mass", d.total_mass()}, {"clamped_mass", d.clamped_mass()}};
  if (!a.is_degenerate() && !b.is_degenerate()) {
    std::size_t worst = 0;
    const SelfMap fa = SelfMap::from_measure(a);
    const SelfMap fb = SelfMap::from_measure(b);
    const std::size_t stride = std::max<std::size_t>(1, grid.count / 200);
    for (std::size_t i = 0; i < grid.count; i += stride)
      worst = std::max(worst, subordination_solve(fa, fb, cplx(grid.x(i), inv.eta), fo).iterations);
    out.summary["max_iterations"] = worst;
  }
  const std::string target = get_str(c, "target");
  if (!target.empty()) out.summary["ks"] = ks_distance(Measure(d), resolve_measure(target, k).measure);
  return out;
}

Output cmd_nevanlinna(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  if (!in.measure.is_atomic()) throw ValidationError("Nevanlinna extraction needs an atomic measure");
  const NevanlinnaRep rep = in.rep ? *in.rep : nevanlinna_extract(in.measure.atomic());
  const SelfMap f = SelfMap::from_measure(in.measure);
  const SelfMap g = nevanlinna_synthesize(rep);
  std::mt19937_64 rng(static_cast<std::uint64_t>(get_int(c, "seed")));
  std::uniform_real_distribution<double> re(-5.0, 5.0), im(0.05, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx z(re(rng), im(rng));
    worst = std::max(worst, std::abs(f(z) - g(z)) / (1.0 + std::abs(f(z))));
  }
  Output out;
  out.columns = {"t", "s"};
  for (std::size_t i = 0; i < rep.sigma.size(); ++i)
    out.rows.push_back({rep.sigma.positions()[i], rep.sigma.masses()[i]});
  out.summary = {{"a", rep.a}, {"sigma_mass", rep.sigma.total_mass()}, {"roundtrip_error", worst}};
  out.json_override = io::to_json(rep);
  return out;
}

Output cmd_boundary_map(const json& c) {
  const RationalBooleMap t = resolve_map(get_str(c, "source"), positive(c, "K"));
  Output out;
  out.columns = {"t", "w"};
  for (std::size_t i = 0; i < t.pole_count(); ++i) out.rows.push_back({t.t()[i], t.w()[i]});
  out.summary = {{"c", t.c()}, {"poles", t.pole_count()}};
  out.json_override = io::to_json(t);
  return out;
}

Output cmd_orbit(const json& c) {
  const RationalBooleMap t = resolve_map(get_str(c, "map"), positive(c, "K"));
  OrbitOptions o{get_real(c, "lo"), get_real(c, "hi"), 0};
  const long long bins = get_int(c, "bins");
  if (bins < 0) throw ValidationError("--bins must be nonnegative");
  o.bins = static_cast<std::size_t>(bins);
  const auto recs = occupation_time(t, get_reals(c, "x0"), positive(c, "N"), o);
  Output out;
  out.columns = {"x0", "length", "visits", "pole_hit"};
  json hist = json::array();
  for (const OrbitRecord& r : recs) {
    out.rows.push_back({r.x0, static_cast<double>(r.length), static_cast<double>(r.visits),
                        r.pole_hit ? 1.0 : 0.0});
    hist.push_back(r.bin_counts);
  }
  if (o.bins > 0) out.summary["bin_counts"] = hist;
  return out;
}

Output cmd_preserve_check(const json& c) {
  const RationalBooleMap t = resolve_map(get_str(c, "map"), positive(c, "K"));
  std::vector<double> ys = get_reals(c, "y");
  if (ys.empty()) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(get_int(c, "seed")));
    std::uniform_real_distribution<double> u(get_real(c, "y-min"), get_real(c, "y-max"));
    const std::size_t count = positive(c, "count");
    for (std::size_t i = 0; i < count; ++i) ys.push_back(u(rng));
  }
  Output out;
  out.columns = {"y", "sum_inv_slope", "deviation", "max_residual"};
  double worst = 0.0;
  for (double y : ys) {
    long double acc = 0.0L;
    double res = 0.0;
    for (const Preimage& p : preimages_detailed(t, y)) {
      acc += p.inv_slope;
      res = std::max(res, p.residual);
    }
    const double dev = static_cast<double>(std::abs(acc - 1.0L));
    worst = std::max(worst, dev);
    out.rows.push_back({y, static_cast<double>(acc), dev, res});
  }
  out.summary = {{"max_deviation", worst}, {"branches", t.pole_count() + 1}};
  return out;
}

Output cmd_aaronson(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const std::size_t n_max = positive(c, "N");
  const AaronsonSums s = in.rep ? aaronson_sums(nevanlinna_synthesize(*in.rep), n_max, z_of(c))
                                : aaronson_sums(in.measure, n_max, z_of(c));
  Output out;
  out.columns = {"n", "term", "s_n"};
  for (std::size_t n = 1; n <= n_max; ++n)
    out.rows.push_back({static_cast<double>(n), s.term[n - 1], s.partial[n - 1]});
  if (n_max >= 1000) {
    std::vector<double> ns, ss;
    for (std::size_t n : log_checkpoints(std::min<std::size_t>(1000, n_max), n_max)) {
      ns.push_back(static_cast<double>(n));
      ss.push_back(s.partial[n - 1]);
    }
    const ModelFit f = fit_sqrt(ns, ss);
    out.summary["sqrt_fit"] = {{"alpha", f.alpha}, {"rel_rmse", f.rel_rmse}};
  }
  return out;
}

Output cmd_conservativity(const json& c) {
  const MeasureInput in = resolve_measure(get_str(c, "measure"), positive(c, "K"));
  const std::size_t n_max = positive(c, "N");
  const std::size_t from = positive(c, "from");
  if (from > n_max) throw ValidationError("--from must not exceed --N");
  const std::string method = get_str(c, "norming");
  ConservativityReport r;
  if (method == "nlogn") {
    r = conservativity_criterion(norming_nlogn(n_max), from);
  } else if (method == "auto") {
    r = conservativity_criterion(centered_of(in.measure), n_max, from);
  } else if (method == "cutoff") {
    r = conservativity_criterion(norming_constants(centered_of(in.measure), n_max, NormingMethod::Cutoff), from);
  } else {
    throw ValidationError("unknown norming method '" + method + "'");
  }
  Output out;
  out.columns = {"N", "norming_partial"};
  if (!r.aaronson_partial.empty()) out.columns.push_back("aaronson_partial");
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    std::vector<double> row{static_cast<double>(r.checkpoints[i]), r.norming_partial[i]};
    if (!r.aaronson_partial.empty()) row.push_back(r.aaronson_partial[i]);
    out.rows.push_back(row);
  }
  out.json_override = io::to_json(r);
  out.summary = json::parse(out.json_override);
  out.summary.erase("checkpoints");
  out.summary.erase("norming_partial");
  out.summary.erase("aaronson_partial");
  return out;
}

Output cmd_hopf(const json& c) {
  const RationalBooleMap t = resolve_map(get_str(c, "map"), positive(c, "K"));
  const KernelSpec f = kernel_of(get_str(c, "f"), get_real(c, "f-lo"), get_real(c, "f-hi"));
  const KernelSpec g = kernel_of(get_str(c, "g"), get_real(c, "g-lo"), get_real(c, "g-hi"));
  std::vector<double> x0s = get_reals(c, "x0");
  if (x0s.empty()) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(get_int(c, "seed")));
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const std::size_t starts = positive(c, "starts");
    for (std::size_t i = 0; i < starts; ++i) x0s.push_back(u(rng));
  }
  const std::size_t n = positive(c, "N");
  Output out;
  out.columns = {"x0", "checkpoint", "ratio", "target"};
  std::vector<double> finals;
  json truncated = json::array();
  for (double x0 : x0s) {
    const HopfResult h = hopf_ratio(t, f, g, x0, n);
    for (std::size_t i = 0; i < h.checkpoints.size(); ++i)
      out.rows.push_back({x0, static_cast<double>(h.checkpoints[i]), h.ratio[i], h.target});
    if (!h.ratio.empty()) finals.push_back(h.ratio.back());
    truncated.push_back(h.truncated);
    out.summary["target"] = h.target;
  }
  if (!finals.empty()) {
    std::sort(finals.begin(), finals.end());
    const std::size_t m = finals.size();
    out.summary["median_final_ratio"] = m % 2 ? finals[m / 2] : 0.5 * (finals[m / 2 - 1] + finals[m / 2]);
  }
  out.summary["truncated"] = truncated;
  return out;
}

Output cmd_example_3_5(const json& c) {
  const std::size_t n = positive(c, "n");
  const Measure m = AtomicMeasure::probability({{-0.5, 0.5}, {0.5, 0.5}});
  const double b = std::sqrt(static_cast<double>(n)) / 2.0;
  const SelfMap fn = scaled_power_map(SelfMap::from_measure(m), n, b);
  Output out;
  out.columns = {"y", "deviation", "bound", "telescoped_deviation", "telescoped_bound"};
  double worst = 0.0;
  for (double y : get_reals(c, "y")) {
    if (!(y > 10.0 && y < 11.0)) throw ValidationError("--y entries must lie in (10, 11)");
    const cplx z(0.0, y);
    const cplx f = fn(z);
    const double dev = std::abs(f * f - (z * z - 2.0));
    const ConjugacyTrace t = conjugacy_trace(m, n, z * z, b);
    const double tdev = std::abs(t.telescoped - (z * z - 2.0));
    worst = std::max(worst, dev);
    out.rows.push_back({y, dev, 5.0 / static_cast<double>(n), tdev, 0.1 / static_cast<double>(n)});
  }
  out.summary = {{"B", b}, {"max_deviation", worst}, {"within_bound", worst <= 5.0 / n}};
  return out;
}

Output cmd_example_3_10b(const json& c) {
  const std::size_t k = positive(c, "K");
  const std::size_t n_max = positive(c, "N");
  const std::string binning = get_str(c, "binning");
  Binning bin;
  if (binning == "symmetrized") bin = Binning::Symmetrized;
  else if (binning == "literal") bin = Binning::Literal;
  else throw ValidationError("--binning must be symmetrized or literal");
  const Example310b ex = example_310b(k, n_max, bin);
  Output out;
  out.columns = {"t", "mass"};
  for (std::size_t i = 0; i < ex.sigma.size(); ++i)
    out.rows.push_back({ex.sigma.positions()[i], ex.sigma.masses()[i]});
  const Measure sigma(ex.sigma);
  const Moments mo = moments(sigma);
  out.summary = {{"defect", ex.defect},
                 {"sigma_mass", ex.sigma.total_mass()},
                 {"sigma_mean", mo.mean * ex.sigma.total_mass()},
                 {"c", ex.boundary.c()},
                 {"B_N", ex.b.at(n_max)}};
  json ratio = json::array();
  for (double x : {10.0, 100.0, 1000.0})
    if (x < static_cast<double>(k)) ratio.push_back({x, harmonic_variance(sigma, x) / (2.0 * std::log(x))});
  out.summary["L_over_2lnx"] = ratio;
  return out;
}

std::vector<Command> commands() {
  const OptSpec measure{"measure", Type::Str, "boole",
                        "boole | bern01 | ex310b | arcsine | normal | semicircle | point:<c> | "
                        "power-tail:<alpha> | JSON | file"};
  const OptSpec kopt{"K", Type::Int, 1000, "pole truncation for ex310b"};
  const OptSpec map{"map", Type::Str, "boole", "boole | ex310b | translation:<c> | map JSON | measure"};
  std::vector<Command> cmds;
  cmds.push_back({"moments", "mean, second moment, variance, H, L and tails",
                  {measure, kopt, {"x", Type::RealList, json::array({1, 2, 5, 10}), "radii"}},
                  cmd_moments});
  cmds.push_back({"norming", "norming constants B_1..B_N",
                  {measure, kopt, {"N", Type::Int, 1000, "horizon"},
                   {"method", Type::Str, "auto", "auto | cutoff | finite-variance | sigma | nlogn"}},
                  cmd_norming});
  {
    std::vector<OptSpec> o{measure, kopt,
                           {"n", Type::IntList, json::array({100, 1000, 10000}), "powers"},
                           {"y", Type::RealList, json::array({1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5}), "z-grid heights"},
                           {"invert", Type::Bool, true, "KS of the inverted law against arcsine"},
                           {"classical", Type::Bool, true, "classical column for atomic measures"},
                           {"norming", Type::Str, "auto", "auto | cutoff | finite-variance | sigma | nlogn"}};
    for (auto& g : grid_options(-4.0, 4.0, 1e-3)) o.push_back(g);
    cmds.push_back({"clt-report", "monotone CLT convergence table", o, cmd_clt_report});
  }
  cmds.push_back({"conjugacy", "psi conjugacy telescoping at z = -y^2",
                  {{"measure", Type::Str, "bern01", measure.help}, kopt,
                   {"n", Type::Int, 1000, "power"},
                   {"y", Type::RealList, json::array({10.2, 10.5, 10.8}), "heights > 10"},
                   {"B", Type::Real, 0.0, "norming constant (0: computed)"}},
                  cmd_conjugacy});
  {
    std::vector<OptSpec> o{measure, kopt, {"n", Type::Int, 1, "monotone power"},
                           {"B", Type::Real, 0.0, "norming constant (0: 1 for n = 1, else computed)"},
                           {"center", Type::Bool, true, "shift by the mean first"},
                           {"target", Type::Str, "", "measure for a KS comparison"}};
    for (auto& g : grid_options(-4.0, 4.0, 1e-3)) o.push_back(g);
    cmds.push_back({"invert", "Stieltjes inversion of a scaled monotone power", o, cmd_invert});
  }
  {
    std::vector<OptSpec> o{{"first", Type::Str, "boole", measure.help},
                           {"second", Type::Str, "boole", measure.help}, kopt,
                           {"tol", Type::Real, 1e-13, "fixed-point tolerance"},
                           {"max-iter", Type::Int, 10000, "fixed-point cap"},
                           {"newton", Type::Bool, true, "Newton acceleration"},
                           {"target", Type::Str, "", "measure for a KS comparison"}};
    for (auto& g : grid_options(-3.0, 3.0, 1e-3)) o.push_back(g);
    cmds.push_back({"free-conv", "free convolution density by subordination", o, cmd_free_conv});
  }
  cmds.push_back({"nevanlinna", "Nevanlinna pair of an atomic measure",
                  {{"measure", Type::Str, "bern01", measure.help}, kopt,
                   {"seed", Type::Int, 1, "seed for the roundtrip sample"}},
                  cmd_nevanlinna});
  cmds.push_back({"boundary-map", "canonical boundary map of a measure or Nevanlinna pair",
                  {{"source", Type::Str, "boole", "measure, {\"a\":..,\"sigma\":..} or map JSON"}, kopt},
                  cmd_boundary_map});
  cmds.push_back({"orbit", "occupation times of an interval",
                  {map, kopt, {"x0", Type::RealList, json::array({0.3}), "starting points"},
                   {"N", Type::Int, 1000000, "steps"},
                   {"lo", Type::Real, -1.0, "interval left end"},
                   {"hi", Type::Real, 1.0, "interval right end"},
                   {"bins", Type::Int, 0, "histogram bins over the interval"}},
                  cmd_orbit});
  cmds.push_back({"preserve-check", "sum of 1/T' over preimages",
                  {map, {"K", Type::Int, 50, kopt.help},
                   {"y", Type::RealList, json::array(), "targets (empty: random)"},
                   {"count", Type::Int, 100, "random targets"},
                   {"y-min", Type::Real, -10.0, "random range"},
                   {"y-max", Type::Real, 10.0, "random range"},
                   {"seed", Type::Int, 1, "seed"}},
                  cmd_preserve_check});
  cmds.push_back({"aaronson", "partial sums of Im(-1/F^n(z))",
                  {measure, kopt, {"N", Type::Int, 10000, "horizon"},
                   {"z-re", Type::Real, 0.0, "Re z"}, {"z-im", Type::Real, 1.0, "Im z"}},
                  cmd_aaronson});
  cmds.push_back({"conservativity", "partial sums of 1/B_n^2 and growth-model verdict",
                  {measure, kopt, {"N", Type::Int, 1000000, "horizon"},
                   {"from", Type::Int, 1000, "first checkpoint"},
                   {"norming", Type::Str, "auto", "auto | cutoff | nlogn"}},
                  cmd_conservativity});
  cmds.push_back({"hopf", "Hopf ratio of Birkhoff sums",
                  {map, kopt, {"f", Type::Str, "cauchy", "cauchy | gaussian | indicator"},
                   {"g", Type::Str, "gaussian", "cauchy | gaussian | indicator"},
                   {"f-lo", Type::Real, 0.0, "indicator interval of f"},
                   {"f-hi", Type::Real, 1.0, "indicator interval of f"},
                   {"g-lo", Type::Real, 0.0, "indicator interval of g"},
                   {"g-hi", Type::Real, 1.0, "indicator interval of g"},
                   {"x0", Type::RealList, json::array(), "starts (empty: random)"},
                   {"starts", Type::Int, 8, "random starts"},
                   {"seed", Type::Int, 1, "seed"},
                   {"N", Type::Int, 1000000, "orbit length"}},
                  cmd_hopf});
  cmds.push_back({"example-3-5", "closed-form rate check for the centered Bernoulli law",
                  {{"n", Type::Int, 1000, "power"},
                   {"y", Type::RealList,
                    json::array({10.1, 10.2, 10.3, 10.4, 10.5, 10.6, 10.7, 10.8, 10.9}),
                    "heights in (10, 11)"}},
                  cmd_example_3_5});
  cmds.push_back({"example-3-10b", "sigma, map and constants of the infinite-variance example",
                  {{"K", Type::Int, 1000, "truncation"}, {"N", Type::Int, 10000, "horizon"},
                   {"binning", Type::Str, "symmetrized", "symmetrized | literal"}},
                  cmd_example_3_10b});
  return cmds;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string render_csv(const Output& o) {
  io::Csv csv(o.columns);
  for (const auto& r : o.rows) csv.row(r);
  return csv.str();
}

std::string render_json(const Output& o) {
  if (!o.json_override.empty()) return o.json_override + "\n";
  json rows = json::array();
  for (const auto& r : o.rows) {
    json a = json::array();
    for (double v : r) a.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    rows.push_back(a);
  }
  return json({{"schema_version", io::kSchemaVersion},
               {"columns", o.columns},
               {"rows", rows},
               {"summary", o.summary}})
             .dump() +
         "\n";
}

int fail(int code, const std::string& op, const std::string& what) {
  std::cerr << "monoclt " << op << ": " << what << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone CLT workbench and ergodic lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MONOCLT_VERSION);

  const auto cmds = commands();
  struct Bound {
    CLI::App* app;
    std::map<std::string, std::string> raw;
    std::string config;
    std::string out = ".";
    std::string format = "csv";
  };
  std::vector<Bound> bound(cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    Bound& b = bound[i];
    b.app = app.add_subcommand(cmds[i].name, cmds[i].help);
    b.app->add_option("--config", b.config, "JSON file with option values");
    b.app->add_option("--out", b.out, "output directory");
    b.app->add_option("--format", b.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    for (const OptSpec& o : cmds[i].options) {
      std::string shown = o.fallback.is_string() ? o.fallback.get<std::string>() : o.fallback.dump();
      if (o.fallback.is_array()) shown = shown.substr(1, shown.size() - 2);
      b.app->add_option("--" + o.name, b.raw[o.name], o.help)
          ->type_name(type_label(o.type))
          ->default_str(shown);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    Bound& b = bound[i];
    if (!b.app->parsed()) continue;
    const Command& cmd = cmds[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::string stem;
    Output result;
    json cfg = json::object();
    try {
      for (const OptSpec& o : cmd.options) cfg[o.name] = o.fallback;
      if (!b.config.empty()) {
        json file = json::parse(read_file(b.config), nullptr, false);
        if (file.is_discarded() || !file.is_object())
          throw ValidationError("config must be a JSON object");
        for (auto& [key, value] : file.items()) {
          if (key == "format") {
            if (!value.is_string()) throw ValidationError("config field 'format' must be a string");
            b.format = value.get<std::string>();
            continue;
          }
          const auto it = std::find_if(cmd.options.begin(), cmd.options.end(),
                                       [&](const OptSpec& o) { return o.name == key; });
          if (it == cmd.options.end()) throw ValidationError("unknown config field '" + key + "'");
          check_type(*it, value);
          cfg[key] = value;
        }
      }
      for (const OptSpec& o : cmd.options) {
        const auto* opt = b.app->get_option("--" + o.name);
        if (opt->count() > 0) cfg[o.name] = parse_flag(o, b.raw[o.name]);
      }
      if (b.format != "csv" && b.format != "json") throw ValidationError("format must be csv or json");
      json canon = cfg;
      canon["format"] = b.format;
      stem = cmd.name + "-" + hex(fnv1a(cmd.name + canon.dump()));
      result = cmd.run(cfg);
    } catch (const Error& e) {
      return fail(e.is_numerical() ? 3 : 2, cmd.name, e.what());
    } catch (const json::exception& e) {
      return fail(2, cmd.name, e.what());
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::error_code ec;
    std::filesystem::create_directories(b.out, ec);
    const std::filesystem::path dir(b.out);
    const std::string artifact = stem + "." + b.format;
    {
      std::ofstream f(dir / artifact, std::ios::binary);
      f << (b.format == "csv" ? render_csv(result) : render_json(result));
      if (!f) return fail(2, cmd.name, "cannot write " + (dir / artifact).string());
    }
    json manifest = {{"subcommand", cmd.name},
                     {"config", cfg},
                     {"format", b.format},
                     {"config_hash", stem.substr(cmd.name.size() + 1)},
                     {"artifact", artifact},
                     {"schema_version", io::kSchemaVersion},
                     {"version", MONOCLT_VERSION},
                     {"simd", simd::isa_name(simd::active_isa())},
                     {"wall_time_s", wall},
                     {"summary", result.summary}};
    std::ofstream m(dir / (stem + ".manifest.json"), std::ios::binary);
    m << manifest.dump(2) << "\n";
    std::cout << (dir / artifact).string() << "\n";
    return 0;
  }
  return 2;
}
