#include <doctest.h>

#include <random>
#include <set>

#include "conclab/concentration.hpp"
#include "oracles.hpp"

using namespace conclab;

namespace {

RationalCoefficients ints(std::initializer_list<std::int64_t> v) {
  return RationalCoefficients::from_integers(std::vector<std::int64_t>(v));
}

}  // namespace

TEST_CASE("exact sum distribution: binomial pattern") {
  RationalDistribution f = exact_sum_distribution(ints({1, 1, 1, 1}), rademacher_exact());
  CHECK(f.size() == 5);
  std::vector<Rational> q{Rational(0)};
  CHECK(f.mass_at(q) == Rational(6, 16));
  q[0] = Rational(2);
  CHECK(f.mass_at(q) == Rational(4, 16));
  q[0] = Rational(4);
  CHECK(f.mass_at(q) == Rational(1, 16));
}

TEST_CASE("exact sum distribution: dissociated coefficients") {
  RationalDistribution f = exact_sum_distribution(ints({1, 2, 4, 8}), rademacher_exact());
  CHECK(f.size() == 16);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.mass(i) == Rational(1, 16));
}

TEST_CASE("exact sum distribution: single point mass") {
  RationalDistribution x = point_mass_exact({Rational(1)});
  RationalDistribution f = exact_sum_distribution(ints({7}), x);
  CHECK(f.size() == 1);
  CHECK(f.point(0)[0] == Rational(7));
}

TEST_CASE("exact sum matches brute-force pattern enumeration") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    std::size_t n = 2 + rng() % 9;
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(static_cast<std::int64_t>(rng() % 19) - 9);
    bool nonzero = false;
    for (auto t : v) nonzero = nonzero || t != 0;
    if (!nonzero) v[0] = 1;
    RationalCoefficients a = RationalCoefficients::from_integers(v);
    RationalDistribution x =
        (rep % 3 == 0) ? lazy_rademacher_exact(Rational(1, 2)) : rademacher_exact();
    RationalDistribution got = exact_sum_distribution(a, x);
    RationalDistribution want = oracle::enumerate_sum_law(a, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(want.mass_at(got.point(i)) == got.mass(i));
    }
  }
}

TEST_CASE("double-path sum distribution on integer instances is exact") {
  CoefficientVector a({1.0, 1.0, 1.0, 1.0}, 1);
  DiscreteDistribution f = exact_sum_distribution(a, rademacher());
  CHECK(f.size() == 5);
  double q[1] = {0.0};
  CHECK(f.mass_at(q) == 6.0 / 16);
}

TEST_CASE("concentration: window examples") {
  RationalDistribution f = exact_sum_distribution(ints({1, 1, 1, 1}), rademacher_exact());
  CHECK(concentration_exact(f, Rational(0)).value == Rational(6, 16));
  CHECK(concentration_exact(f, Rational(2)).value == Rational(10, 16));
  RationalDistribution g = exact_sum_distribution(ints({1, 2, 4, 8}), rademacher_exact());
  CHECK(concentration_exact(g, Rational(0)).value == Rational(1, 16));

  DiscreteDistribution fd = exact_sum_distribution(CoefficientVector({1, 1, 1, 1}, 1),
                                                   rademacher());
  ConcentrationResult r0 = concentration(fd, 0.0);
  CHECK(r0.lower == r0.upper);
  CHECK(r0.upper == 6.0 / 16);
  CHECK(r0.method == ConcentrationMethod::exact_window);
  ConcentrationResult r2 = concentration(fd, 2.0);
  CHECK(r2.upper == 10.0 / 16);
  CHECK_THROWS_AS(concentration(fd, -1.0), std::invalid_argument);
}

TEST_CASE("window agrees with quadratic scan oracle") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    std::size_t n = 3 + rng() % 8;
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(static_cast<std::int64_t>(rng() % 15) + 1);
    RationalDistribution f =
        exact_sum_distribution(RationalCoefficients::from_integers(v), rademacher_exact());
    for (std::int64_t t : {0, 1, 2, 5}) {
      Rational tau(t);
      CHECK(concentration_exact(f, tau).value == oracle::window_scan(f, tau));
    }
  }
}

TEST_CASE("concentration monotone in tau") {
  DiscreteDistribution f =
      exact_sum_distribution(CoefficientVector({1, 3, 4, 9, 11}, 1), rademacher());
  double prev_u = 0.0, prev_l = 0.0;
  for (double tau : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 30.0}) {
    ConcentrationResult r = concentration(f, tau);
    CHECK(r.upper >= prev_u - 1e-15);
    CHECK(r.lower >= prev_l - 1e-15);
    prev_u = r.upper;
    prev_l = r.lower;
  }
  CHECK(concentration(f, 100.0).upper == 1.0);
}

TEST_CASE("max atom mass bounds Q") {
  DiscreteDistribution f =
      exact_sum_distribution(CoefficientVector({2, 2, 5}, 1), rademacher());
  double max_mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) max_mass = std::max(max_mass, f.mass(i));
  CHECK(concentration(f, 0.0).upper == max_mass);
  for (double tau : {0.0, 1.0, 3.0}) {
    ConcentrationResult r = concentration(f, tau);
    CHECK(r.upper >= max_mass);
    CHECK(r.upper <= 1.0);
  }
}

TEST_CASE("scaling identity holds exactly on the rational path") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    std::size_t n = 3 + rng() % 6;
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(static_cast<std::int64_t>(rng() % 9) + 1);
    RationalCoefficients a = RationalCoefficients::from_integers(v);
    for (const Rational& scale : {Rational(1, 3), Rational(2), Rational(7)}) {
      for (const Rational& tau : {Rational(0), Rational(1), Rational(3, 2)}) {
        RationalDistribution f = exact_sum_distribution(a, rademacher_exact());
        RationalDistribution fs =
            exact_sum_distribution(scale_coefficients(a, scale), rademacher_exact());
        CHECK(concentration_exact(f, tau).value ==
              concentration_exact(fs, tau * scale).value);
      }
    }
  }
}

TEST_CASE("regularity inequality on exact values") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 3 + rng() % 8;
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(static_cast<std::int64_t>(rng() % 10) + 1);
    RationalDistribution f =
        exact_sum_distribution(RationalCoefficients::from_integers(v), rademacher_exact());
    for (const Rational& lambda : {Rational(1, 2), Rational(1), Rational(2)}) {
      for (const Rational& ratio :
           {Rational(1, 2), Rational(1), Rational(2), Rational(5, 2)}) {
        Rational mu = lambda * ratio;
        Rational q_mu = concentration_exact(f, mu).value;
        Rational q_l = concentration_exact(f, lambda).value;
        long long factor = regularity_factor(mu, lambda, 1);
        CHECK(q_mu <= Rational(factor) * q_l);
      }
    }
  }
}

TEST_CASE("classical max-mass bound for distinct coefficients") {
  // for Rademacher signs and distinct nonzero coefficients the largest atom
  // is at most C(n, floor(n/2)) / 2^n; checked exhaustively for n <= 16
  std::mt19937_64 rng(31);
  for (std::size_t n : {3u, 5u, 8u, 11u, 14u, 16u}) {
    std::vector<std::int64_t> v;
    std::set<std::int64_t> used;
    while (v.size() < n) {
      std::int64_t c = static_cast<std::int64_t>(rng() % 500) + 1;
      if (used.insert(c).second) v.push_back(c);
    }
    RationalDistribution f =
        exact_sum_distribution(RationalCoefficients::from_integers(v), rademacher_exact());
    Rational q0 = concentration_exact(f, Rational(0)).value;
    Rational bound = oracle::binomial(static_cast<int>(n), static_cast<int>(n / 2)) /
                     Rational(std::int64_t(1) << n);
    CHECK(q0 <= bound);
  }
}

TEST_CASE("d >= 2 bracket is certified and tau = 0 stays exact") {
  CoefficientVector a({1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0}, 2);
  DiscreteDistribution f = exact_sum_distribution(a, rademacher());
  ConcentrationResult r0 = concentration(f, 0.0);
  CHECK(r0.method == ConcentrationMethod::exact_window);
  double max_mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) max_mass = std::max(max_mass, f.mass(i));
  CHECK(r0.upper == max_mass);

  ConcentrationResult rb = concentration(f, 1.5);
  CHECK(rb.method == ConcentrationMethod::bracket_candidates);
  CHECK(rb.lower <= rb.upper);
  CHECK(rb.lower >= max_mass);  // an atom center always qualifies
  CHECK(rb.upper <= 1.0);

  // brute-force lower bound via a fine candidate grid must stay inside
  double best = 0.0;
  for (double cx = -4.0; cx <= 4.0; cx += 0.25) {
    for (double cy = -4.0; cy <= 4.0; cy += 0.25) {
      double s = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        double dx = f.point(i)[0] - cx;
        double dy = f.point(i)[1] - cy;
        if (dx * dx + dy * dy <= 0.75 * 0.75 + 1e-12) s += f.mass(i);
      }
      best = std::max(best, s);
    }
  }
  CHECK(best <= rb.upper + 1e-12);
}

TEST_CASE("support cap signals the quadrature path") {
  CoefficientVector a({1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048}, 1);
  CHECK_THROWS_AS(exact_sum_distribution(a, rademacher(), 100), cap_exceeded);
}
