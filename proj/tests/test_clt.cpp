#include <cmath>
#include <numbers>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "monoclt/clt.hpp"
#include "monoclt/error.hpp"
#include "oracles.hpp"

using namespace monoclt;
using doctest::Approx;

namespace {

const cplx I(0.0, 1.0);

AtomicMeasure centred_bern() { return shift(corpus::bern01(), -0.5); }

AtomicMeasure from(const oracle::Atoms& a) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < a.x.size(); ++i) atoms.push_back({a.x[i], a.w[i]});
  return AtomicMeasure::probability(atoms);
}

std::vector<std::size_t> log_ns(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> ns;
  for (double e = std::log10(static_cast<double>(lo)); e <= std::log10(static_cast<double>(hi)) + 1e-9; e += 0.25)
    ns.push_back(static_cast<std::size_t>(std::llround(std::pow(10.0, e))));
  return ns;
}

struct Ex {
  const AtomicMeasure& mu;
  const NevanlinnaRep& rep;
};

Ex ex() { return {corpus::all()[2].mu, corpus::all()[2].rep}; }

}  // namespace

TEST_CASE("norming constant examples") {
  CHECK(norming_constant(corpus::two_point(), 100) == Approx(10.0).epsilon(1e-14));
  CHECK(norming_constant(corpus::two_point(), 100, NormingMethod::Cutoff) == Approx(10.0).epsilon(1e-10));
  const NormingSequence b = norming_constants(centred_bern(), 500);
  CHECK(b.provenance == NormingProvenance::FiniteVariance);
  for (std::size_t n : {1u, 7u, 100u, 500u}) CHECK(b.at(n) == Approx(std::sqrt(double(n)) / 2.0).epsilon(1e-14));
  const NormingSequence c = norming_constants(centred_bern(), 500, NormingMethod::Cutoff);
  for (std::size_t n : {4u, 100u, 500u}) CHECK(c.at(n) == Approx(std::sqrt(double(n)) / 2.0).epsilon(1e-10));
  CHECK_THROWS_AS(norming_constants(AtomicMeasure::point(1.0), 10), DegenerateMeasure);
}

TEST_CASE("cutoff constants of the |t|^-3 law") {
  const Measure nu = ReferenceLaw::power_tail(2.0);
  const NormingSequence b = norming_constants(nu, 10000);
  CHECK(b.provenance == NormingProvenance::CutoffEq31);
  for (std::size_t n : {10u, 100u, 10000u}) {
    CHECK(b.at(n) == Approx(oracle::nlog_root(double(n))).epsilon(1e-8));
    const double y = b.at(n);
    // largest-solution convention
    CHECK(n * truncated_variance(nu, y) <= y * y * (1.0 + 1e-9));
    CHECK(n * truncated_variance(nu, y * (1.0 - 1e-6)) > std::pow(y * (1.0 - 1e-6), 2));
  }
  for (std::size_t n = 2; n <= 10000; ++n) CHECK(b.at(n) >= b.at(n - 1));
}

TEST_CASE("asymptotic: |t|^-3 cutoff constant against sqrt(n ln n)" * doctest::test_suite("asymptotic")) {
  // the exact root of 2 n ln B = B^2 is about 1.12 sqrt(n ln n) at n = 1e4
  const double b = norming_constant(ReferenceLaw::power_tail(2.0), 10000);
  CHECK(b == Approx(std::sqrt(1e4 * std::log(1e4))).epsilon(0.10));
}

TEST_CASE("sigma criterion examples") {
  const NevanlinnaRep quarter{0.0, AtomicMeasure::finite({{0.0, 0.25}})};
  NormingSequence b;
  for (std::size_t n = 1; n <= 1000; ++n) b.values.push_back(std::sqrt(double(n)) / 2.0);
  for (double y : {0.5, 1.0, 3.0}) {
    const SigmaCheck s = norming_check_sigma(quarter, b, y);
    for (double r : s.ratio) CHECK(r == Approx(1.0).epsilon(1e-14));
    CHECK(s.max_tail_deviation < 1e-14);
  }
  const double mass = 2.7;
  const NevanlinnaRep rb{0.0, AtomicMeasure::finite({{0.0, mass}})};
  NormingSequence c;
  for (std::size_t n = 1; n <= 100; ++n) c.values.push_back(std::sqrt(n * mass));
  CHECK(norming_check_sigma(rb, c).max_tail_deviation < 1e-14);
}

TEST_CASE("sigma criterion on the truncated |t|^-3 example pair") {
  // constants from the cutoff of the atoms of mu
  const NormingSequence b = norming_constants(ex().mu, 10000, NormingMethod::Cutoff);
  const SigmaCheck s = norming_check_sigma(ex().rep, b, 1.0);
  CHECK(s.max_tail_deviation < 0.10);
  // L_sigma(x) ~ 2 ln x
  for (double x : {100.0, 1000.0}) CHECK(harmonic_variance(ex().rep.sigma, x) / (2.0 * std::log(x)) == Approx(1.0).epsilon(0.1));
}

TEST_CASE("asymptotic: sigma criterion with sqrt(n ln n)" * doctest::test_suite("asymptotic")) {
  const SigmaCheck s = norming_check_sigma(ex().rep, norming_nlogn(10000), 1.0);
  CHECK(s.ratio.back() == Approx(1.0).epsilon(0.10));
}

TEST_CASE("slow variation examples") {
  const Measure nu = ReferenceLaw::power_tail(2.0);
  const SlowVariationReport r = slow_variation_report(nu, {2.0}, {1e6});
  CHECK(r.ratio[0][0] == Approx(std::log(2e6) / std::log(1e6)).epsilon(1e-6));
  CHECK(r.ratio[0][0] == Approx(1.050).epsilon(1e-3));

  const SlowVariationReport f = slow_variation_report(Measure(corpus::two_point()), {2.0, 10.0}, {5.0, 50.0});
  for (const auto& row : f.ratio)
    for (double v : row) CHECK(v == 1.0);

  // index 1/2 law: H(x) = 3 (sqrt x - 1)
  const Measure half = ReferenceLaw::power_tail(1.5);
  CHECK(truncated_variance(half, 100.0) == Approx(27.0).epsilon(1e-8));
  const SlowVariationReport h = slow_variation_report(half, {2.0}, {1e4, 1e5, 1e6, 1e7});
  CHECK(h.index == Approx(0.5).epsilon(0.1));
  CHECK(std::abs(h.index - 0.5) <= 0.05);

  const SlowVariationReport l = slow_variation_report(ex().rep, {2.0}, {1e2, 1e3});
  CHECK(l.ratio[0][1] == Approx(std::log(2e3) / std::log(1e3)).epsilon(0.02));
}

TEST_CASE("monotone CLT for the symmetric two-point law") {
  CltOptions o;
  o.invert = false;
  const CltReport r = clt_report(corpus::two_point(), {100, 1000, 10000}, o);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[2].b == Approx(100.0));
  CHECK(r.rows[2].sup_deviation <= 0.02);
  CHECK(r.monotone);
  CHECK(r.rows[0].n < r.rows[1].n);
}

TEST_CASE("centered Bernoulli rate at z = 10.5i") {
  const std::size_t n = 1000;
  const cplx z = 10.5 * I;
  const cplx f = scaled_monotone_power(centred_bern(), n, std::sqrt(double(n)) / 2.0)(z);
  CHECK(std::abs(f * f - (z * z - 2.0)) <= 5.0 / n);
}

TEST_CASE("classical column against the normal law") {
  CltOptions o;
  o.invert = false;
  const CltReport r = clt_report(corpus::two_point(), {1024}, o);
  REQUIRE(r.rows[0].ks_normal);
  CHECK(*r.rows[0].ks_normal <= 0.02);
  // exact binomial oracle: the largest jump is the central atom
  const double central = std::exp(std::lgamma(1025.0) - 2.0 * std::lgamma(513.0) - 1024.0 * std::log(2.0));
  CHECK(*r.rows[0].ks_normal == Approx(central / 2.0).epsilon(0.02));
}

TEST_CASE("clt report centres and records missing columns") {
  CltOptions o;
  o.invert = false;
  o.atom_cap = 10;
  const CltReport r = clt_report(corpus::bern01(), {64}, o);
  CHECK(r.center == Approx(0.5));
  CHECK_FALSE(r.rows[0].ks_normal);
  CHECK_FALSE(r.rows[0].note.empty());
}

TEST_CASE("conjugacy trace examples") {
  const cplx z(-110.25, 0.0);
  for (std::size_t n : {1u, 10u, 100u, 1000u}) {
    const ConjugacyTrace t = conjugacy_trace(centred_bern(), n, z, std::sqrt(double(n)) / 2.0);
    CHECK(std::abs(t.lhs - t.telescoped) <= 1e-10 * std::abs(t.lhs));
    CHECK(std::abs(t.telescoped - (z - 2.0)) <= 1.0 / (10.0 * n));
  }
  const ConjugacyTrace one = conjugacy_trace(corpus::two_point(), 1, z, 1.0);
  const cplx f = SelfMap::from_measure(corpus::two_point())(10.5 * I);
  CHECK(std::abs(one.lhs - f * f) <= 1e-12 * std::abs(f * f));

  const ConjugacyTrace b = conjugacy_trace(corpus::two_point(), 1000, z, std::sqrt(1000.0));
  CHECK(std::abs(b.remainder_sum + 2.0) <= 0.02);
  CHECK_THROWS_AS(conjugacy_trace(corpus::two_point(), 10, cplx(-81.0, 0.0), 1.0), DomainError);
  CHECK_THROWS_AS(conjugacy_trace(corpus::two_point(), 10, cplx(-110.25, 1.0), 1.0), DomainError);
}

TEST_CASE("iterate drift bound examples") {
  const std::size_t n = 1000;
  const auto rows = lemma41_check(centred_bern(), n, 10.5, {0, n}, std::sqrt(double(n)) / 2.0);
  CHECK(rows[0].deviation == 0.0);
  CHECK(rows[0].bound == 0.0);
  CHECK_FALSE(rows[0].violated);
  CHECK(rows[1].bound == Approx(10.0));
  CHECK(rows[1].deviation == Approx(2.0 / (10.5 + std::sqrt(10.5 * 10.5 + 2.0))).epsilon(0.01));

  const auto b = lemma41_check(corpus::two_point(), 1000, 11.0, {500}, std::sqrt(1000.0));
  CHECK(b[0].deviation <= 5.0);
  CHECK_FALSE(b[0].violated);
}

TEST_CASE("law of large numbers examples") {
  const std::vector<cplx> zs{I, 2.0 * I, cplx(1.0, 1.0)};
  for (const auto& row : lln_check(AtomicMeasure::point(0.3), {1, 10, 100}, zs))
    CHECK(row.max_deviation < 1e-12);
  CHECK(std::abs(lln_check(corpus::bern01(), {10000}, {I})[0].deviation[0]) <= 0.01);
  CHECK(std::abs(lln_check(corpus::two_point(), {10000}, {2.0 * I})[0].deviation[0]) <= 0.01);
  const auto rows = lln_check(corpus::bern01(), {10, 100, 1000}, zs);
  CHECK(rows[2].max_deviation < rows[0].max_deviation);
}

TEST_CASE("property: cutoff and finite-variance routes agree") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 50; ++t) {
    AtomicMeasure m = from(oracle::random_atoms(rng, 2 + t % 10));
    m = shift(m, -moments(m).mean);
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const double a = norming_constant(m, n, NormingMethod::Cutoff);
      const double b = norming_constant(m, n, NormingMethod::FiniteVariance);
      CHECK(a == Approx(b).epsilon(0.01));
    }
  }
}

TEST_CASE("property: scale equivariance of norming constants") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> bd(0.1, 10.0);
  for (int t = 0; t < 20; ++t) {
    const AtomicMeasure m = from(oracle::random_atoms(rng, 2 + t % 8));
    const double s = bd(rng);
    for (NormingMethod method : {NormingMethod::Cutoff, NormingMethod::FiniteVariance}) {
      const NormingSequence a = norming_constants(dilate(m, s), 2000, method);
      const NormingSequence b = norming_constants(m, 2000, method);
      for (std::size_t n : {1u, 10u, 500u, 2000u}) CHECK(a.at(n) == Approx(s * b.at(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: monotone CLT deviation shrinks on the corpus") {
  CltOptions o;
  o.invert = false;
  o.classical = false;
  for (const auto& e : corpus::all()) {
    CAPTURE(e.name);
    const NormingSequence b = norming_constants(e.mu, 10000, NormingMethod::Cutoff);
    CltOptions oe = o;
    oe.norming = [&b](std::size_t n) { return b.at(n); };
    const CltReport r = clt_report(e.mu, {100, 1000, 10000}, oe);
    CHECK(r.monotone);
  }
}

TEST_CASE("property: sigma criterion on the corpus") {
  for (const auto& e : corpus::all()) {
    CAPTURE(e.name);
    const NormingSequence b = norming_constants(e.mu, 10000, NormingMethod::Cutoff);
    CHECK(norming_check_sigma(e.rep, b).max_tail_deviation < 0.10);
  }
}

TEST_CASE("norming log slope of finite-variance measures") {
  for (const auto& m : {corpus::two_point(), corpus::uniform_grid()}) {
    const double s = norming_log_slope(norming_constants(m, 10000), log_ns(100, 10000));
    CHECK(s >= 0.48);
    CHECK(s <= 0.52);
  }
  // sqrt(n ln n) has local slope 1/2 + 1/(2 ln n)
  const double s = norming_log_slope(norming_nlogn(10000), {5000, 10000});
  CHECK(s == Approx(0.5 + 1.0 / (2.0 * std::log(7071.0))).epsilon(0.01));
}

TEST_CASE("asymptotic: norming log slope on the whole corpus" * doctest::test_suite("asymptotic")) {
  for (const auto& e : corpus::all()) {
    CAPTURE(e.name);
    const double s = norming_log_slope(norming_constants(e.mu, 10000, NormingMethod::Cutoff), log_ns(100, 10000));
    CHECK(s >= 0.48);
    CHECK(s <= 0.52);
  }
}

TEST_CASE("B_n over sqrt(n) is slowly varying for the |t|^-3 example") {
  const NormingSequence b = norming_constants(ex().mu, 10000, NormingMethod::Cutoff);
  const auto f = [&](double n) { return b.at(static_cast<std::size_t>(n)) / std::sqrt(n); };
  const SlowVariationReport r = slow_variation_report(f, {2.0}, {1000.0, 5000.0});
  for (double v : r.ratio[0]) CHECK(v == Approx(1.0).epsilon(0.05));
}
