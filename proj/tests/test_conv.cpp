#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "monoclt/conv.hpp"
#include "monoclt/error.hpp"
#include "oracles.hpp"

using namespace monoclt;
using doctest::Approx;

namespace {

const cplx I(0.0, 1.0);

AtomicMeasure two_point() { return AtomicMeasure::probability({{-1.0, 0.5}, {1.0, 0.5}}); }

AtomicMeasure from(const oracle::Atoms& a) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < a.x.size(); ++i) atoms.push_back({a.x[i], a.w[i]});
  return AtomicMeasure::probability(atoms);
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

void check_atoms(const AtomicMeasure& m, const std::vector<Atom>& want) {
  REQUIRE(m.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(m.positions()[i] == Approx(want[i].x));
    CHECK(m.masses()[i] == Approx(want[i].mass).epsilon(1e-14));
  }
}

}  // namespace

TEST_CASE("monotone convolution examples") {
  const SelfMap ab = monotone_convolve(AtomicMeasure::point(1.5), AtomicMeasure::point(-4.0));
  for (cplx z : {I, cplx(2.0, 0.1)}) CHECK(close(ab(z), z + 2.5, 1e-15));

  const SelfMap m0 = monotone_convolve(two_point(), AtomicMeasure::point(0.0));
  const SelfMap f = SelfMap::from_measure(two_point());
  for (cplx z : {I, cplx(-0.3, 0.7)}) CHECK(close(m0(z), f(z), 1e-15));

  CHECK(close(monotone_convolve(two_point(), two_point())(2.0 * I), 2.9 * I, 1e-14));
}

TEST_CASE("monotone power examples") {
  const cplx z(0.4, 0.9);
  CHECK(monotone_power(two_point(), 0)(z) == z);
  CHECK(close(monotone_power(two_point(), 1)(z), SelfMap::from_measure(two_point())(z), 0.0));
  // F^{o5} = F^{o2} o F^{o3}
  const SelfMap p2 = monotone_power(two_point(), 2), p3 = monotone_power(two_point(), 3);
  CHECK(close(monotone_power(two_point(), 5)(z), p2(p3(z)), 1e-13));
  CHECK(close(monotone_power(two_point(), 5)(z), p3(p2(z)), 1e-13));
}

TEST_CASE("scaled monotone power examples") {
  // centred Bernoulli: F(z) = z - 1/(4z), B = sqrt(n)/2
  const AtomicMeasure c = shift(AtomicMeasure::probability({{0.0, 0.5}, {1.0, 0.5}}), -0.5);
  const ScaledPowerMap one = scaled_monotone_power(c, 1, 0.5);
  for (cplx z : {I, cplx(1.0, 2.0), cplx(-3.0, 0.05)}) CHECK(close(one(z), z - 1.0 / z, 1e-14));
  for (std::size_t n : {4u, 16u, 100u}) {
    const ScaledPowerMap p = scaled_monotone_power(c, n, std::sqrt(static_cast<double>(n)) / 2.0);
    cplx w = cplx(0.2, 0.8);
    const cplx z = w;
    for (std::size_t k = 0; k < n; ++k) w = w - 1.0 / (static_cast<double>(n) * w);
    CHECK(close(p(z), w, 1e-12));
  }

  const SelfMap f = SelfMap::from_measure(two_point());
  CHECK(close(scaled_monotone_power(two_point(), 1, 1.0)(cplx(0.1, 0.3)), f(cplx(0.1, 0.3)), 1e-15));

  const cplx v = scaled_monotone_power(two_point(), 10000, 100.0)(I);
  CHECK(std::abs(v - I * std::sqrt(3.0)) <= 0.05);
  // Cauchy behaviour in n
  const cplx v4 = scaled_monotone_power(two_point(), 40000, 200.0)(I);
  CHECK(std::abs(v4 - I * std::sqrt(3.0)) < std::abs(v - I * std::sqrt(3.0)));
}

TEST_CASE("classical power examples") {
  const AtomicMeasure b01 = AtomicMeasure::probability({{0.0, 0.5}, {1.0, 0.5}});
  check_atoms(classical_power(b01, 2), {{0, 0.25}, {1, 0.5}, {2, 0.25}});
  check_atoms(classical_power(AtomicMeasure::point(0.75), 7), {{5.25, 1.0}});
  check_atoms(classical_power(two_point(), 4),
              {{-4, 1.0 / 16}, {-2, 4.0 / 16}, {0, 6.0 / 16}, {2, 4.0 / 16}, {4, 1.0 / 16}});
  CHECK(classical_power(b01, 0).size() == 1);
  const AtomicMeasure big = classical_power(two_point(), 1000);
  CHECK(big.size() == 1001);
  CHECK(moments(big).var == Approx(1000.0));
}

TEST_CASE("property: monotone associativity at map level") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> re(-3, 3), im(0.05, 3);
  for (int t = 0; t < 100; ++t) {
    const auto m = from(oracle::random_atoms(rng, 2 + t % 5));
    const auto n = from(oracle::random_atoms(rng, 2 + t % 4));
    const auto r = from(oracle::random_atoms(rng, 2 + t % 3));
    const SelfMap fm = SelfMap::from_measure(m), fn = SelfMap::from_measure(n), fr = SelfMap::from_measure(r);
    const SelfMap left = SelfMap::compose({monotone_convolve(m, n), fr});
    const SelfMap right = SelfMap::compose({fm, monotone_convolve(n, r)});
    const cplx z(re(rng), im(rng));
    CHECK(std::abs(left(z) - right(z)) <= 1e-12 * (1.0 + std::abs(left(z))));
  }
}

TEST_CASE("property: dilation homomorphism") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> re(-3, 3), im(0.05, 3), bd(0.2, 5.0);
  for (int t = 0; t < 100; ++t) {
    const auto m = from(oracle::random_atoms(rng, 2 + t % 6));
    const auto n = from(oracle::random_atoms(rng, 2 + t % 5));
    const double b = bd(rng);
    const SelfMap lhs = SelfMap::dilated(monotone_convolve(m, n), b);
    const SelfMap rhs = monotone_convolve(dilate(m, b), dilate(n, b));
    const cplx z(re(rng), im(rng));
    CHECK(std::abs(lhs(z) - rhs(z)) <= 1e-12 * (1.0 + std::abs(rhs(z))));
  }
}

TEST_CASE("property: F distance and KS agree in ordering along n") {
  const std::vector<std::size_t> ns{100, 1000, 10000};
  const SelfMap target = SelfMap::arcsine();
  std::vector<double> fdist, ks;
  for (std::size_t n : ns) {
    const SelfMap f = scaled_monotone_power(two_point(), n, std::sqrt(static_cast<double>(n)));
    double d = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const cplx z(-3.0 + 0.6 * i, 0.5 + 0.5 * j);
        d = std::max(d, std::abs(f(z) - target(z)));
      }
    fdist.push_back(d);
    // eta has to sit below the smoothing floor of the n = 1e4 distance
    const GridDensity g = measure_from_map(f, Grid::covering(-2, 2, 2e-4), {1e-3, true});
    ks.push_back(ks_distance(Measure(g), ReferenceLaw::arcsine(), 1e-2));
  }
  for (std::size_t k = 1; k < ns.size(); ++k) {
    CHECK(fdist[k] < fdist[k - 1]);
    CHECK(ks[k] < ks[k - 1]);
  }
}

TEST_CASE("free convolution examples") {
  const SelfMap s = free_convolve(AtomicMeasure::point(1.0), AtomicMeasure::point(2.0));
  CHECK(close(s(I), I - 3.0, 1e-15));

  const SelfMap m0 = free_convolve(two_point(), AtomicMeasure::point(0.0));
  CHECK(close(m0(cplx(0.3, 0.4)), SelfMap::from_measure(two_point())(cplx(0.3, 0.4)), 1e-15));

  // b boxplus b: G(z) = (z^2 - 4)^(-1/2)
  const SelfMap bb = free_convolve(two_point(), two_point());
  for (cplx z : {I, cplx(1.0, 0.5), cplx(-2.5, 0.2), cplx(0.3, 3.0)})
    CHECK(close(bb(z), sqrt_upper(z * z - 4.0), 1e-10));
}

TEST_CASE("property: free convolution symmetry") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> re(-3, 3), im(0.1, 3);
  for (int t = 0; t < 50; ++t) {
    const auto m = from(oracle::random_atoms(rng, 2 + t % 5));
    const auto n = from(oracle::random_atoms(rng, 2 + t % 4));
    const cplx z(re(rng), im(rng));
    const cplx a = free_convolve(m, n)(z), b = free_convolve(n, m)(z);
    CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("property: variance additivity under free convolution") {
  const GridDensity d = measure_from_map(free_convolve(two_point(), two_point()), Grid{}, {1e-2, true});
  const Moments mo = moments(Measure(d));
  CHECK(mo.var == Approx(2.0).epsilon(0.01));
  CHECK(mo.mean == Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("subordination reports non-convergence") {
  FreeConvOptions o;
  o.max_iter = 2;
  o.newton = false;
  CHECK_THROWS_AS(subordination_solve(SelfMap::from_measure(two_point()),
                                      SelfMap::from_measure(two_point()), cplx(0.3, 1e-3), o),
                  NonConvergence);
}
