#include <doctest.h>

#include <numbers>
#include <random>

#include "conclab/charfn.hpp"
#include "oracles.hpp"

using namespace conclab;

TEST_CASE("cf of the smoothing law") {
  CoefficientVector a({1.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);
  double t0[1] = {0.0};
  CHECK(cf_eval(spec, t0) == doctest::Approx(1.0).epsilon(1e-15));
  double tpi[1] = {std::numbers::pi};
  // single unit coefficient at t = pi: exp(-(1/2)(1 - cos pi)) = exp(-1)
  CHECK(cf_eval(spec, tpi) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  double tneg[1] = {-1.37};
  double tpos[1] = {1.37};
  CHECK(cf_eval(spec, tneg) == doctest::Approx(cf_eval(spec, tpos)).epsilon(1e-15));
}

TEST_CASE("cf positivity and unit bound for compound Poisson specs") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> e;
    std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) e.push_back(static_cast<double>(rng() % 9) + 1.0);
    CompoundPoissonSpec spec =
        weighted_sum_levy_spec(CoefficientVector(e, 1), 0.25 * (1 + rng() % 4));
    for (int k = 0; k < 50; ++k) {
      double t[1] = {-30.0 + 60.0 * static_cast<double>(rng() % 1000) / 1000.0};
      double v = cf_eval(spec, t);
      CHECK(v > 0.0);
      CHECK(v <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("cf bound from symmetrization, pointwise") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t k = 2 + rng() % 5;
    std::vector<double> pts;
    std::vector<double> ws;
    double tot = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      pts.push_back(static_cast<double>(rng() % 21) - 10.0);
      double w = static_cast<double>(rng() % 7) + 1.0;
      ws.push_back(w);
      tot += w;
    }
    for (double& w : ws) w /= tot;
    DiscreteDistribution law(1, pts, ws);
    for (int g = 0; g < 100; ++g) {
      double t[1] = {-25.0 + 50.0 * static_cast<double>(g) / 99.0};
      double b = std::abs(cf_eval(law, t));
      CHECK(b <= std::exp(-0.5 * (1.0 - b * b)) + 1e-12);
    }
  }
}

TEST_CASE("cf of symmetrization equals squared modulus") {
  DiscreteDistribution x(1, {0.0, 1.0, 3.0}, {0.2, 0.5, 0.3});
  DiscreteDistribution g = symmetrize(x);
  for (double tv : {-2.0, -0.7, 0.0, 0.31, 1.9}) {
    double t[1] = {tv};
    double lhs = cf_eval(g, t).real();
    double m = std::abs(cf_eval(x, t));
    CHECK(lhs == doctest::Approx(m * m).epsilon(1e-12));
    CHECK(std::abs(cf_eval(g, t).imag()) < 1e-12);
  }
}

TEST_CASE("esseen integral of a point mass") {
  // cf == 1, so the integral over |t| <= 1/tau is 2/tau and tau * that is 2
  EsseenEstimate e = esseen_integral(point_mass({0.0}), 1.0);
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.quadrature_error <= 1e-9);

  // lambda -> 0 reproduces the point-mass value by continuity
  CoefficientVector a({1.0, 1.0, 1.0, 1.0}, 1);
  EsseenEstimate e0 = esseen_integral(weighted_sum_levy_spec(a, 1e-12), 1.0);
  CHECK(e0.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("esseen matches a dense midpoint reference") {
  CoefficientVector a({1.0, 1.0, 1.0, 1.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);
  EsseenEstimate e = esseen_integral(spec, 1.0, QuadratureLimits{1e-10, 1u << 18});
  double ref = oracle::midpoint_reference(spec, 1.0, 1'000'000);
  CHECK(e.value == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("esseen integral rejects bad arguments") {
  CHECK_THROWS_AS(esseen_integral(point_mass({0.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(esseen_integral(point_mass({0.0, 0.0, 0.0}), 1.0), std::invalid_argument);
  CoefficientVector wild({1.0, std::sqrt(2.0), std::numbers::pi * 100.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(wild, 1.0);
  CHECK_THROWS_AS(esseen_integral(spec, 1e-7, QuadratureLimits{1e-14, 8}),
                  quadrature_budget_exceeded);
}

TEST_CASE("lattice detection") {
  CHECK(common_lattice_scale(std::vector<double>{2.0, 4.0, 6.0}).value() ==
        doctest::Approx(2.0));
  CHECK(common_lattice_scale(std::vector<double>{0.5, 1.25}).value() ==
        doctest::Approx(0.25));
  CHECK_FALSE(common_lattice_scale(std::vector<double>{1.0, std::sqrt(2.0)}).has_value());
}

TEST_CASE("lattice inversion vs the Poisson-series oracle") {
  CoefficientVector a({1.0, 1.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);  // alpha = 1
  DiscreteDistribution exact = compound_poisson_exact(spec, 1e-15);
  for (long long k : {0LL, 1LL, 2LL, 3LL, -1LL}) {
    long long kk[1] = {k};
    double inv = lattice_inversion(spec, kk, 1e-12);
    double pt[1] = {static_cast<double>(k)};
    CHECK(inv == doctest::Approx(exact.mass_at(pt)).epsilon(1e-10));
  }
  // mass at 0 is at least the no-jump probability
  long long zero[1] = {0};
  CHECK(lattice_inversion(spec, zero, 1e-12) >= std::exp(-spec.alpha()) - 1e-12);
}

TEST_CASE("lattice law sums to one and matches inversion") {
  CoefficientVector a({1.0, 2.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);
  DiscreteDistribution law = lattice_law(spec, 1e-12);
  double sum = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) sum += law.mass(i);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (long long k : {0LL, 1LL, 3LL}) {
    long long kk[1] = {k};
    double pt[1] = {static_cast<double>(k)};
    CHECK(lattice_inversion(spec, kk, 1e-12) ==
          doctest::Approx(law.mass_at(pt)).epsilon(1e-9));
  }
  CompoundPoissonSpec bad = weighted_sum_levy_spec(
      CoefficientVector({1.0, std::sqrt(2.0)}, 1), 1.0);
  CHECK_THROWS_AS(lattice_law(bad, 1e-10), non_lattice_support);
}

TEST_CASE("compound poisson exact oracle basics") {
  CoefficientVector a({1.0, 2.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);
  DiscreteDistribution d = compound_poisson_exact(spec, 1e-12);
  CHECK(d.is_symmetric(1e-10));
  // cf of the output matches the analytic cf on a grid
  for (int g = 0; g < 100; ++g) {
    double t[1] = {-8.0 + 16.0 * static_cast<double>(g) / 99.0};
    CHECK(cf_eval(d, t).real() == doctest::Approx(cf_eval(spec, t)).epsilon(1e-8));
    CHECK(std::abs(cf_eval(d, t).imag()) < 1e-10);
  }

  // zero rate collapses to a point mass at the origin
  DiscreteDistribution z =
      compound_poisson_exact(CompoundPoissonSpec(SpectralMeasure(1, {}, {})), 1e-10);
  CHECK(z.size() == 1);
  CHECK(z.point(0)[0] == 0.0);
}

TEST_CASE("smoothed concentration: degenerate and scaling") {
  CoefficientVector a({1.0, 2.0, 4.0}, 1);
  SmoothedConcentration deg = smoothed_concentration(a, 0.0, 1.0);
  CHECK(deg.value == 1.0);
  CHECK(deg.path == QPath::degenerate);

  // Q(H_z, tau) = Q(H_1, tau/z): evaluate both sides through the lattice path
  for (double z : {0.5, 2.0}) {
    CompoundPoissonSpec hz = weighted_sum_levy_spec(a, 0.5, z);
    DiscreteDistribution law_z = lattice_law(hz, 1e-11);
    double lhs = concentration(law_z, 1.0).upper;
    SmoothedConcentration rhs = smoothed_concentration(a, 0.5, 1.0 / z, 1e-11);
    CHECK(rhs.path == QPath::inversion_exact);
    CHECK(lhs == doctest::Approx(rhs.value).epsilon(1e-9));
  }
}

TEST_CASE("smoothed concentration agrees with the series oracle") {
  CoefficientVector a({1.0, 1.0, 1.0, 1.0}, 1);
  SmoothedConcentration sc = smoothed_concentration(a, 0.5, 1.0, 1e-11);
  CHECK(sc.path == QPath::inversion_exact);
  DiscreteDistribution d = compound_poisson_exact(weighted_sum_levy_spec(a, 0.5), 1e-15);
  double want = concentration(d, 1.0).upper;
  CHECK(sc.value == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("smoothed concentration falls back to the Esseen surrogate") {
  CoefficientVector a({1.0, std::sqrt(2.0)}, 1);
  SmoothedConcentration sc = smoothed_concentration(a, 0.5, 1.0);
  CHECK(sc.path == QPath::esseen_surrogate);
  CHECK(sc.value > 0.0);
}

TEST_CASE("smoothed concentration bound") {
  CoefficientVector a({1.0, 1.0, 1.0, 1.0}, 1);
  DiscreteDistribution x = rademacher();
  // delta = kappa reduces to the plain smoothed concentration
  double at_kappa = smoothed_concentration(a, 0.5, 1.0).value;
  CHECK(smoothed_concentration_bound(a, x, 1.0, 1.0, 1.0) ==
        doctest::Approx(at_kappa).epsilon(1e-12));
  // vanishing tail factor degenerates to the regularity prefactor
  DiscreteDistribution narrow = point_mass({0.25});
  CHECK(smoothed_concentration_bound(a, narrow, 1.0, 1.0, 0.5) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // the bound dominates the exact concentration once scaled by its ratio
  DiscreteDistribution f = exact_sum_distribution(a, x);
  double q = concentration(f, 1.0).upper;
  double rhs = smoothed_concentration_bound(a, x, 1.0, 1.0, 1.0);
  CHECK(rhs > 0.0);
  CHECK(q / rhs < 10.0);
}
