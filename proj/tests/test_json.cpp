#include <doctest.h>

#include "conclab/json_io.hpp"

using namespace conclab;

TEST_CASE("distribution round trip is bit-exact") {
  DiscreteDistribution f(1, {0.0, 1.0 / 3.0, 2.0}, {0.25, 0.5, 0.25});
  json j = to_json(f);
  CHECK(j.at("schema") == kSchemaMeasures);
  DiscreteDistribution back = discrete_distribution_from_json(json::parse(j.dump()));
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(back.points()[i] == f.points()[i]);
    CHECK(back.masses()[i] == f.masses()[i]);
  }
}

TEST_CASE("coefficient vector round trip") {
  CoefficientVector a({1.5, -2.0, 0.0, 7.25}, 2);
  CoefficientVector back = coefficient_vector_from_json(json::parse(to_json(a).dump()));
  CHECK(back.data() == a.data());
  CHECK(back.dim() == 2);
}

TEST_CASE("spectral measure and compound poisson round trip") {
  SpectralMeasure m(1, {1.0, -1.0, 2.0, -2.0}, {0.5, 0.5, 0.125, 0.125});
  SpectralMeasure mb = spectral_measure_from_json(json::parse(to_json(m).dump()));
  CHECK(mb.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-15));
  CompoundPoissonSpec spec(m);
  CompoundPoissonSpec sb = compound_poisson_from_json(json::parse(to_json(spec).dump()));
  CHECK(sb.alpha() == doctest::Approx(spec.alpha()).epsilon(1e-15));
}

TEST_CASE("concentration result round trip") {
  ConcentrationResult r;
  r.lower = 0.25;
  r.upper = 0.375;
  r.tau = 1.5;
  r.method = ConcentrationMethod::bracket_candidates;
  r.witness_center = std::vector<double>{0.5, -2.0};
  ConcentrationResult back = concentration_result_from_json(json::parse(to_json(r).dump()));
  CHECK(back.lower == r.lower);
  CHECK(back.upper == r.upper);
  CHECK(back.method == r.method);
  CHECK(back.witness_center == r.witness_center);
}

TEST_CASE("esseen estimate round trip") {
  EsseenEstimate e{1.25, 1e-10, 0.5, 33};
  EsseenEstimate back = esseen_estimate_from_json(json::parse(to_json(e).dump()));
  CHECK(back.value == e.value);
  CHECK(back.panels == 33);
}

TEST_CASE("progression round trips") {
  GAP g;
  g.g0 = {0.0, 1.0};
  g.gens = {{3.0, 0.0}, {0.0, 5.0}};
  g.lo = {-1, -2};
  g.hi = {1, 2};
  GAP gb = gap_from_json(json::parse(to_json(g).dump()));
  CHECK(gb.gens == g.gens);
  CHECK(gb.lo == g.lo);

  CGAP k;
  k.blocks.push_back(CgapBlock{{2.0}, ConvexBody::box({2.5}), 1.0});
  k.blocks.push_back(CgapBlock{{1.0, 4.0}, ConvexBody::ellipsoid({1.5, 1.5}), 0.0});
  CGAP kb = cgap_from_json(json::parse(to_json(k).dump()));
  CHECK(kb.blocks.size() == 2);
  CHECK(kb.blocks[0].offset == 1.0);
  CHECK(kb.blocks[1].body.kind() == ConvexBody::Kind::ellipsoid);
  CHECK(points_of(kb).size() == points_of(k).size());

  SignedCube cube;
  cube.u = {{1.0, 0.0}, {0.0, 2.0}};
  SignedCube cb = signed_cube_from_json(json::parse(to_json(cube).dump()));
  CHECK(cb.u == cube.u);
}

TEST_CASE("structure report round trip") {
  CoefficientVector a({3.0, 6.0, 9.0, 100.0}, 1);
  StructureReport rep = inverse_detect(a, rademacher(), 0.0, 1.0, 1);
  StructureReport back = structure_report_from_json(json::parse(to_json(rep).dump()));
  CHECK(back.rank == rep.rank);
  CHECK(back.covered == rep.covered);
  CHECK(back.outliers == rep.outliers);
  CHECK(back.bound_targets.size() == rep.bound_targets.size());
  for (std::size_t i = 0; i < rep.bound_targets.size(); ++i) {
    CHECK(back.bound_targets[i].name == rep.bound_targets[i].name);
    CHECK(back.bound_targets[i].satisfied == rep.bound_targets[i].satisfied);
  }
}

TEST_CASE("suite record and calibration round trips") {
  SuiteRecord r;
  r.case_id = "x/1";
  r.digest = "deadbeef";
  r.lhs = 0.1;
  r.rhs = 0.0;
  r.identity = "x";
  SuiteRecord rb = suite_record_from_json(json::parse(to_json(r).dump()));
  CHECK(rb.case_id == r.case_id);
  CHECK_FALSE(rb.ratio.has_value());

  CalibrationTable t;
  t["x"] = IdentityStats{5, 0.5, 2.0, 1.0, 0.6, 1.9};
  CalibrationTable tb = calibration_table_from_json(json::parse(to_json(t).dump()));
  CHECK(tb.at("x").max == 2.0);
  CHECK(tb.at("x").count == 5);
}

TEST_CASE("strict schemas reject unknown fields") {
  json j = to_json(rademacher());
  j["surprise"] = 1;
  CHECK_THROWS_AS(discrete_distribution_from_json(j), std::invalid_argument);
  json k = to_json(CoefficientVector({1.0}, 1));
  k["schema"] = "measures/v2";
  CHECK_THROWS_AS(coefficient_vector_from_json(k), std::invalid_argument);
}
