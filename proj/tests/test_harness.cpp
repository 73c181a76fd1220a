#include <doctest.h>

#include "conclab/harness.hpp"

using namespace conclab;

namespace {

SuiteConfig quick_config(std::uint64_t seed, int threads = 1) {
  SuiteConfig cfg;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.cases_regularity = 24;
  cfg.cases_scaling = 9;
  cfg.cases_cf_bound = 6;
  cfg.cf_grid_points = 64;
  cfg.cases_smoothing = 6;
  cfg.cases_sandwich = 12;
  cfg.cases_arak = 6;
  cfg.cases_inverse_shape = 6;
  cfg.cases_cube_shape = 6;
  return cfg;
}

}  // namespace

TEST_CASE("planted instances honor their contract") {
  PlantedInstance inst = planted_instance(1, {3.0}, 5, 16, 0, 0.0, 9);
  CHECK(inst.coefficients.size() == 16);
  CHECK(inst.outlier_indices.empty());
  PointSet truth = points_of(inst.truth);
  CoverCount cc = cover_count(inst.coefficients, truth, 0.0);
  CHECK(cc.covered == 16);

  PlantedInstance noisy = planted_instance(2, {3.0, 5.0}, 25, 24, 3, 0.01, 10);
  CHECK(noisy.coefficients.dim() == 2);
  PointSet t2 = points_of(noisy.truth);
  CoverCount cc2 = cover_count(noisy.coefficients, t2, 0.01);
  CHECK(cc2.covered == 24 - 3);
  CHECK(cc2.outliers == noisy.outlier_indices);

  // pure noise instance
  PlantedInstance pure = planted_instance(1, {3.0}, 5, 8, 8, 0.0, 11);
  CHECK(pure.outlier_indices.size() == 8);

  // determinism
  PlantedInstance again = planted_instance(2, {3.0, 5.0}, 25, 24, 3, 0.01, 10);
  CHECK(again.coefficients.data() == noisy.coefficients.data());
}

TEST_CASE("quick suite: constant-free identities all pass") {
  auto records = run_suite(quick_config(7));
  std::size_t checked = 0;
  for (const auto& r : records) {
    if (r.identity == kIdentityRegularity || r.identity == kIdentityScaling ||
        r.identity == kIdentityCfBound) {
      REQUIRE(r.pass.has_value());
      CHECK(*r.pass);
      ++checked;
    }
  }
  CHECK(checked == 24 + 9 + 6);
}

TEST_CASE("suite ratios are finite and positive where expected") {
  auto records = run_suite(quick_config(7));
  for (const auto& r : records) {
    if (r.ratio) {
      CHECK(std::isfinite(*r.ratio));
      CHECK(*r.ratio >= 0.0);
    }
    if (r.identity == kIdentitySandwich && r.ratio) CHECK(*r.ratio > 0.0);
  }
}

TEST_CASE("suite determinism across runs and thread counts") {
  auto r1 = run_suite(quick_config(7, 1));
  auto r2 = run_suite(quick_config(7, 1));
  auto r8 = run_suite(quick_config(7, 8));
  CHECK(suite_csv(r1) == suite_csv(r2));
  CHECK(suite_csv(r1) == suite_csv(r8));
  auto r_other = run_suite(quick_config(8, 1));
  CHECK(suite_csv(r1) != suite_csv(r_other));
}

TEST_CASE("calibrate") {
  std::vector<SuiteRecord> records;
  SuiteRecord a;
  a.identity = "x";
  a.ratio = 0.8;
  records.push_back(a);
  CalibrationTable t = calibrate(records);
  CHECK(t.at("x").max == doctest::Approx(0.8));
  CHECK(t.at("x").count == 1);

  SuiteRecord b;
  b.identity = "x";
  b.ratio = 2.0;
  records.push_back(b);
  b.ratio = 0.5;
  records.push_back(b);
  t = calibrate(records);
  CHECK(t.at("x").max == doctest::Approx(2.0));
  CHECK(t.at("x").min == doctest::Approx(0.5));
  CHECK(t.at("x").median == doctest::Approx(0.8));

  CHECK_THROWS_AS(calibrate(records, {"missing-class"}), std::invalid_argument);
}

TEST_CASE("calibration is monotone under added cases") {
  auto r1 = run_suite(quick_config(7));
  auto cfg2 = quick_config(7);
  cfg2.cases_smoothing = 10;
  auto r2 = run_suite(cfg2);
  auto t1 = calibrate(r1);
  auto t2 = calibrate(r2);
  CHECK(t2.at(kIdentitySmoothingQ).max >= t1.at(kIdentitySmoothingQ).max - 1e-12);
}

TEST_CASE("sandwich band is strictly positive") {
  std::vector<HSuiteMember> suite;
  for (double lambda : {0.25, 0.5, 1.0}) {
    suite.push_back(HSuiteMember{
        weighted_sum_levy_spec(CoefficientVector({1, 1, 1, 1}, 1), lambda), 1.0});
    suite.push_back(HSuiteMember{
        weighted_sum_levy_spec(CoefficientVector({1, 2, 4}, 1), lambda), 0.5});
  }
  // degenerate corner: cf == 1, Q = 1, integral = 2/tau * tau = 2, ratio 1/2
  suite.push_back(
      HSuiteMember{weighted_sum_levy_spec(CoefficientVector({1.0}, 1), 1e-14), 1.0});
  auto [lo, hi] = verify_sandwich_band(suite, 1e-10);
  CHECK(lo > 0.0);
  CHECK(hi >= lo);
  CHECK(lo <= 0.5 + 1e-6);
  CHECK(hi >= 0.5 - 1e-6);
}

TEST_CASE("drift gate") {
  CalibrationTable base;
  base["x"] = IdentityStats{10, 0.5, 2.0, 1.0, 0.6, 1.8};
  CalibrationTable ok;
  ok["x"] = IdentityStats{10, 0.52, 2.04, 1.0, 0.6, 1.8};
  CHECK(check_drift(ok, base).empty());
  CalibrationTable bad;
  bad["x"] = IdentityStats{10, 0.5, 2.5, 1.0, 0.6, 1.8};
  CHECK(check_drift(bad, base).size() == 1);
  CalibrationTable low;
  low["x"] = IdentityStats{10, 0.2, 2.0, 1.0, 0.6, 1.8};
  CHECK(check_drift(low, base).size() == 1);
}

TEST_CASE("csv shape") {
  std::vector<SuiteRecord> records;
  SuiteRecord r;
  r.case_id = "demo/0";
  r.identity = "demo";
  r.digest = "abc";
  r.lhs = 1.0 / 3.0;
  r.rhs = 2.0 / 3.0;
  r.ratio = 0.5;
  r.pass = true;
  records.push_back(r);
  std::string csv = suite_csv(records);
  CHECK(csv.rfind("case_id,identity,lhs,rhs,ratio,pass\n", 0) == 0);
  CHECK(csv.find("demo/0,demo,0.33333333333333331,0.66666666666666663,0.5,true") !=
        std::string::npos);
}
