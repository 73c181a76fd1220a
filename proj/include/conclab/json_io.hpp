#pragma once

#include <string>

#include <json.hpp>

#include "conclab/harness.hpp"

namespace conclab {

using json = nlohmann::json;

// Versioned schemas.  Atoms serialize as arrays [x_1, ..., x_d, mass].
inline constexpr const char* kSchemaMeasures = "measures/v1";
inline constexpr const char* kSchemaConcentration = "concentration/v1";
inline constexpr const char* kSchemaCharfn = "charfn/v1";
inline constexpr const char* kSchemaProgressions = "progressions/v1";
inline constexpr const char* kSchemaStructure = "structure/v1";
inline constexpr const char* kSchemaHarness = "harness/v1";

// Throws std::invalid_argument when `j` holds keys outside `allowed`.
void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context);

json to_json(const CoefficientVector& a);
CoefficientVector coefficient_vector_from_json(const json& j);

json to_json(const DiscreteDistribution& f);
DiscreteDistribution discrete_distribution_from_json(const json& j);

json to_json(const SpectralMeasure& m);
SpectralMeasure spectral_measure_from_json(const json& j);

json to_json(const CompoundPoissonSpec& spec);
CompoundPoissonSpec compound_poisson_from_json(const json& j);

json to_json(const ConcentrationResult& r);
ConcentrationResult concentration_result_from_json(const json& j);

json to_json(const EsseenEstimate& e);
EsseenEstimate esseen_estimate_from_json(const json& j);

json to_json(const GAP& g);
GAP gap_from_json(const json& j);

json to_json(const ConvexBody& v);
ConvexBody convex_body_from_json(const json& j);

json to_json(const CGAP& k);
CGAP cgap_from_json(const json& j);

json to_json(const SignedCube& k);
SignedCube signed_cube_from_json(const json& j);

json to_json(const BetaResult& b);
BetaResult beta_result_from_json(const json& j);

json to_json(const StructureReport& r);
StructureReport structure_report_from_json(const json& j);

json to_json(const SuiteRecord& r);
SuiteRecord suite_record_from_json(const json& j);

json to_json(const CalibrationTable& t);
CalibrationTable calibration_table_from_json(const json& j);

}  // namespace conclab
