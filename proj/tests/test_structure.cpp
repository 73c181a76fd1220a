#include <doctest.h>

#include <random>
#include <set>

#include "conclab/structure.hpp"
#include "oracles.hpp"

using namespace conclab;

namespace {

SpectralMeasure measure_1d(std::vector<double> pts, std::vector<double> wts) {
  return SpectralMeasure(1, std::move(pts), std::move(wts));
}

}  // namespace

TEST_CASE("beta_upper basics") {
  // support {1, -1}: the unit-step progression covers everything at tau = 0
  SpectralMeasure w = measure_1d({1, -1, 1, -1, 1, -1}, {1, 1, 1, 1, 1, 1});
  BetaResult b = beta_upper(w, 1, 3, 0.0);
  CHECK(b.upper == doctest::Approx(0.0));

  // tau at least the max support radius: {0} already covers everything
  SpectralMeasure w2 = measure_1d({1, 2, 4, 8, -1, -2, -4, -8}, std::vector<double>(8, 1));
  BetaResult b2 = beta_upper(w2, 1, 3, 8.0);
  CHECK(b2.upper == doctest::Approx(0.0));

  // with m = 3 and tau = 0 the best 3-term progression leaves mass behind
  BetaResult b3 = beta_upper(w2, 1, 3, 0.0);
  CHECK(b3.upper > 0.0);
  BetaResult exact3 = beta_exact_rank1(w2, 3, 0.0);
  CHECK(b3.upper >= exact3.upper - 1e-12);  // upper-bound soundness
}

TEST_CASE("beta_exact_rank1 examples") {
  // {0, 5, 10, 11}: step 5 covers {0,5,10}, the escape mass is the atom at 11
  SpectralMeasure w = measure_1d({0, 5, 10, 11}, {1, 1, 1, 1});
  BetaResult b = beta_exact_rank1(w, 3, 0.0);
  CHECK(b.exact);
  CHECK(b.upper == doctest::Approx(1.0));

  // enough volume on a common step: zero escape mass
  SpectralMeasure ap = measure_1d({0, 5, 10}, {1, 1, 1});
  CHECK(beta_exact_rank1(ap, 5, 0.0).upper == doctest::Approx(0.0));

  // m = 1: a single point, best window wins
  SpectralMeasure heavy = measure_1d({0, 5, 10}, {1, 3, 1});
  CHECK(beta_exact_rank1(heavy, 1, 0.0).upper == doctest::Approx(2.0));
}

TEST_CASE("beta_exact_rank1 matches the dumb scan") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 25; ++rep) {
    std::size_t k = 3 + rng() % 8;
    std::vector<Rational> rp;
    std::vector<Rational> rw;
    std::vector<double> pts;
    std::vector<double> wts;
    std::set<std::int64_t> seen;
    for (std::size_t i = 0; i < k; ++i) {
      std::int64_t p = static_cast<std::int64_t>(rng() % 41) - 20;
      if (!seen.insert(p).second) continue;
      std::int64_t wgt = 1 + static_cast<std::int64_t>(rng() % 4);
      rp.push_back(Rational(p));
      rw.push_back(Rational(wgt));
      pts.push_back(static_cast<double>(p));
      wts.push_back(static_cast<double>(wgt));
    }
    SpectralMeasure w = measure_1d(pts, wts);
    for (long long m : {1LL, 3LL, 5LL}) {
      for (std::int64_t t : {0LL, 1LL}) {
        BetaResult got = beta_exact_rank1(w, m, static_cast<double>(t));
        Rational want = oracle::beta_rank1_scan(rp, rw, m, Rational(t));
        CHECK(got.upper == doctest::Approx(want.to_double()).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("arak bound rhs") {
  CHECK(arak_bound_rhs(1.0, 1, 1, 1.0) ==
        doctest::Approx(1.0 + std::pow(2.0, 2.5)).epsilon(1e-12));
  // doubling m halves the first term exactly
  double full = arak_bound_rhs(2.0, 1, 1, 1.0);
  double half = arak_bound_rhs(2.0, 1, 2, 1.0);
  double tail_only = std::pow(2.0, 2.5) / 2.0;
  CHECK(full - tail_only == doctest::Approx(2.0 * (half - tail_only)).epsilon(1e-12));
  // decreasing in alpha*beta and in m
  double prev = kInfinity;
  for (double ab : {0.5, 1.0, 2.0, 4.0}) {
    double v = arak_bound_rhs(ab, 2, 3, 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(arak_bound_rhs(1.0, 1, 10, 1.0) < arak_bound_rhs(1.0, 1, 5, 1.0));
  CHECK(arak_bound_rhs(0.0, 1, 1, 1.0) == kInfinity);
  // the floored variant multiplies by 1 + strict_floor(kappa/delta)
  CHECK(arak_bound_rhs_floored(1.0, 1, 1, 1.0, 2.0, 1.0) ==
        doctest::Approx(2.0 * arak_bound_rhs(1.0, 1, 1, 1.0)));
}

TEST_CASE("fit_progression_1d examples") {
  Fit1D f1 = fit_progression_1d(std::vector<double>{3, 6, 9, 12}, 0.0, 9);
  CHECK(f1.outliers.empty());
  CHECK(std::fabs(f1.step) == doctest::Approx(3.0));
  CHECK(f1.volume <= 9);

  Fit1D f2 = fit_progression_1d(std::vector<double>{3, 6, 9, 100}, 0.0, 9, 1);
  REQUIRE(f2.outliers.size() == 1);
  CHECK(f2.outliers[0] == 3);
  CHECK(std::fabs(f2.step) == doctest::Approx(3.0));

  Fit1D f3 = fit_progression_1d(std::vector<double>{5, 5, 5}, 0.0, 9);
  CHECK(f3.outliers.empty());
  CHECK(f3.volume == 1);
  CHECK(f3.offset == doctest::Approx(5.0));
}

TEST_CASE("fit recovers planted steps with noise on the real path") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    double h = 2.0 + static_cast<double>(rng() % 5);
    double tau = 0.25;
    std::vector<double> values;
    for (int i = -3; i <= 3; ++i) {
      double noise = (static_cast<double>(rng() % 1000) / 1000.0 - 0.5) * 0.01;
      values.push_back(h * i + noise);
    }
    Fit1D fit = fit_progression_1d(values, tau, 9);
    CHECK(fit.outliers.empty());
    CHECK(fit.volume <= 9);
  }
}

TEST_CASE("inverse_detect on planted progressions") {
  // d = 1 planted AP, zero outliers, tau = 0
  std::vector<double> entries;
  for (int i = 0; i < 16; ++i) entries.push_back(3.0 * static_cast<double>((i % 5) - 2));
  entries[0] = 3.0;  // avoid the all-zero corner when i % 5 == 2 only
  CoefficientVector a(entries, 1);
  StructureReport rep = inverse_detect(a, rademacher(), 0.0, 1.0, 0);
  CHECK(rep.covered == 16);
  CHECK(rep.outliers.empty());
  CHECK(rep.rank == 1);
  CHECK(rep.volume <= 9);
  CHECK(rep.residual_mass == 0.0);

  // dissociated coefficients under a small cap: honest outliers
  CoefficientVector diss({1, 2, 4, 8, 16, 32, 64, 128}, 1);
  DetectConfig cfg;
  cfg.m_cap_default = 5;
  StructureReport rep2 = inverse_detect(diss, rademacher(), 0.0, 1.0, 0, cfg);
  CHECK(rep2.covered < 8);
  CHECK(rep2.covered + rep2.outliers.size() == 8);

  // d = 2 planted grid: product progression with one nonzero coordinate per
  // generator
  std::vector<double> grid;
  for (int i = 0; i < 12; ++i) {
    grid.push_back(3.0 * static_cast<double>((i % 3) - 1));
    grid.push_back(5.0 * static_cast<double>((i % 5) - 2));
  }
  CoefficientVector a2(grid, 2);
  StructureReport rep3 = inverse_detect(a2, rademacher(), 0.0, 1.0, 0);
  CHECK(rep3.covered == 12);
  CHECK(rep3.rank == 2);
  const CGAP& k = std::get<CGAP>(rep3.progression);
  REQUIRE(k.blocks.size() == 2);
  for (const auto& b : k.blocks) CHECK(b.h.size() == 1);
}

TEST_CASE("inverse_detect determinism") {
  std::vector<double> entries;
  for (int i = 0; i < 10; ++i) entries.push_back(static_cast<double>(2 * (i % 4) + 1));
  CoefficientVector a(entries, 1);
  StructureReport r1 = inverse_detect(a, rademacher(), 1.0, 0.5, 2);
  StructureReport r2 = inverse_detect(a, rademacher(), 1.0, 0.5, 2);
  CHECK(r1.covered == r2.covered);
  CHECK(r1.outliers == r2.outliers);
  CHECK(r1.volume == r2.volume);
  CHECK(r1.coordinate_q == r2.coordinate_q);
}

TEST_CASE("k1 report: equal coefficients collapse to rank 1") {
  CoefficientVector a({4.0, 4.0, 4.0, 4.0, 4.0, 4.0}, 1);
  std::vector<double> tau{1.0};
  std::vector<double> delta{1.0};
  StructureReport rep = k1_structure_report(a, rademacher(), tau, delta);
  CHECK(rep.rank == 1);
  CHECK(rep.residual_mass == 0.0);
  CHECK(rep.covered == 6);
}

TEST_CASE("k1 report: odd points via two generators") {
  CoefficientVector a({1.0, -1.0, 3.0, -3.0, 1.0, 3.0}, 1);
  std::vector<double> tau{0.0};
  std::vector<double> delta{0.0};
  StructureReport rep = k1_structure_report(a, rademacher(), tau, delta);
  CHECK(rep.residual_mass == 0.0);
  CHECK(rep.rank == 2);
  CHECK(rep.covered == 6);
}

TEST_CASE("k1 report: degenerate tail factor is flagged") {
  CoefficientVector a({1.0, 2.0}, 1);
  // X concentrated on [-1/4, 1/4]: the symmetrized tail beyond 1 vanishes
  DiscreteDistribution x(1, {-0.25, 0.25}, {0.5, 0.5});
  std::vector<double> tau{1.0};
  std::vector<double> delta{1.0};
  StructureReport rep = k1_structure_report(a, x, tau, delta);
  CHECK(rep.degenerate);
  CHECK(rep.residual_mass == 0.0);
  for (const auto& t : rep.bound_targets) {
    if (t.name == "residual-mass") CHECK(t.satisfied);
  }
}

TEST_CASE("k1 report through a compound Poisson spec") {
  CoefficientVector a({1.0, 3.0}, 1);
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, 1.0);
  std::vector<double> tau{1.0};
  std::vector<double> delta{1.0};
  StructureReport rep = k1_structure_report(spec, tau, delta);
  CHECK(rep.residual_mass == 0.0);
  CHECK(rep.rank >= 1);
}

TEST_CASE("k1 report for convolution powers") {
  DiscreteDistribution f(1, {-3.0, 0.0, 3.0}, {0.25, 0.5, 0.25});
  std::vector<double> tau{1.0};
  std::vector<double> delta{1.0};
  StructureReport rep = k1_structure_report(f, 4, tau, delta);
  CHECK(rep.residual_mass == 0.0);
  CHECK(rep.rank == 1);  // everything sits on the step-3 lattice
}

TEST_CASE("k1 rank cap yields honest unsatisfied residual") {
  CoefficientVector diss({1, 2, 4, 8, 16, 32, 64, 128, 256, 512}, 1);
  K1Config cfg;
  cfg.rank_cap_abs = 2;
  cfg.rank_cap_c = 0.1;
  std::vector<double> tau{0.0};
  std::vector<double> delta{0.0};
  StructureReport rep = k1_structure_report(diss, rademacher(), tau, delta, cfg);
  CHECK(rep.residual_mass > 0.0);
  CHECK(rep.rank <= 2);
}
