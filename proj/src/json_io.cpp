#include "conclab/json_io.hpp"

#include <cmath>
#include <set>

namespace conclab {

namespace {

void check_schema(const json& j, const char* schema, const char* context) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
    throw std::invalid_argument(std::string(context) + ": expected schema " + schema);
}

// doubles survive a JSON round trip bit-exactly via nlohmann's shortest
// round-trip formatting; infinities are boxed as strings
json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double num_from(const json& j, const char* context) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    throw std::invalid_argument(std::string(context) + ": bad numeric string");
  }
  return j.get<double>();
}

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context) {
  if (!j.is_object())
    throw std::invalid_argument(std::string(context) + ": expected a JSON object");
  std::set<std::string> ok;
  for (const char* k : allowed) ok.insert(k);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key()))
      throw std::invalid_argument(std::string(context) + ": unknown field '" + it.key() +
                                  "'");
  }
}

// ---------------------------------------------------------------------------
// measures
// ---------------------------------------------------------------------------

json to_json(const CoefficientVector& a) {
  json entries = json::array();
  for (std::size_t k = 0; k < a.size(); ++k) {
    json row = json::array();
    for (double v : a.entry(k)) row.push_back(v);
    entries.push_back(std::move(row));
  }
  return json{{"schema", kSchemaMeasures},
              {"kind", "coefficient_vector"},
              {"d", a.dim()},
              {"entries", std::move(entries)}};
}

CoefficientVector coefficient_vector_from_json(const json& j) {
  check_schema(j, kSchemaMeasures, "coefficient_vector");
  require_keys(j, {"schema", "kind", "d", "entries"}, "coefficient_vector");
  if (j.at("kind") != "coefficient_vector")
    throw std::invalid_argument("coefficient_vector: wrong kind");
  int d = j.at("d").get<int>();
  std::vector<double> flat;
  for (const auto& row : j.at("entries")) {
    if (static_cast<int>(row.size()) != d)
      throw std::invalid_argument("coefficient_vector: entry width mismatch");
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return CoefficientVector(std::move(flat), d);
}

namespace {

json atoms_to_json(int d, const std::vector<double>& pts, const std::vector<double>& ws) {
  json atoms = json::array();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    json row = json::array();
    for (int c = 0; c < d; ++c) row.push_back(pts[i * static_cast<std::size_t>(d) + c]);
    row.push_back(ws[i]);
    atoms.push_back(std::move(row));
  }
  return atoms;
}

void atoms_from_json(const json& atoms, int d, std::vector<double>& pts,
                     std::vector<double>& ws) {
  for (const auto& row : atoms) {
    if (static_cast<int>(row.size()) != d + 1)
      throw std::invalid_argument("atoms: expected [x_1..x_d, mass] rows");
    for (int c = 0; c < d; ++c) pts.push_back(row[c].get<double>());
    ws.push_back(row[d].get<double>());
  }
}

}  // namespace

json to_json(const DiscreteDistribution& f) {
  return json{{"schema", kSchemaMeasures},
              {"kind", "discrete_distribution"},
              {"d", f.dim()},
              {"atoms", atoms_to_json(f.dim(), f.points(), f.masses())}};
}

DiscreteDistribution discrete_distribution_from_json(const json& j) {
  check_schema(j, kSchemaMeasures, "discrete_distribution");
  require_keys(j, {"schema", "kind", "d", "atoms"}, "discrete_distribution");
  if (j.at("kind") != "discrete_distribution")
    throw std::invalid_argument("discrete_distribution: wrong kind");
  int d = j.at("d").get<int>();
  std::vector<double> pts;
  std::vector<double> ws;
  atoms_from_json(j.at("atoms"), d, pts, ws);
  return DiscreteDistribution(d, std::move(pts), std::move(ws));
}

json to_json(const SpectralMeasure& m) {
  return json{{"schema", kSchemaMeasures},
              {"kind", "spectral_measure"},
              {"d", m.dim()},
              {"total_mass", m.total_mass()},
              {"atoms", atoms_to_json(m.dim(), m.points(), m.weights())}};
}

SpectralMeasure spectral_measure_from_json(const json& j) {
  check_schema(j, kSchemaMeasures, "spectral_measure");
  require_keys(j, {"schema", "kind", "d", "total_mass", "atoms"}, "spectral_measure");
  if (j.at("kind") != "spectral_measure")
    throw std::invalid_argument("spectral_measure: wrong kind");
  int d = j.at("d").get<int>();
  std::vector<double> pts;
  std::vector<double> ws;
  atoms_from_json(j.at("atoms"), d, pts, ws);
  return SpectralMeasure(d, std::move(pts), std::move(ws));
}

json to_json(const CompoundPoissonSpec& spec) {
  return json{{"schema", kSchemaMeasures},
              {"kind", "compound_poisson"},
              {"levy", to_json(spec.levy())}};
}

CompoundPoissonSpec compound_poisson_from_json(const json& j) {
  check_schema(j, kSchemaMeasures, "compound_poisson");
  require_keys(j, {"schema", "kind", "levy"}, "compound_poisson");
  if (j.at("kind") != "compound_poisson")
    throw std::invalid_argument("compound_poisson: wrong kind");
  return CompoundPoissonSpec(spectral_measure_from_json(j.at("levy")));
}

// ---------------------------------------------------------------------------
// concentration / charfn
// ---------------------------------------------------------------------------

json to_json(const ConcentrationResult& r) {
  json out{{"schema", kSchemaConcentration},
           {"lower", r.lower},
           {"upper", r.upper},
           {"tau", r.tau},
           {"method", to_string(r.method)}};
  if (r.witness_center) out["witness_center"] = *r.witness_center;
  return out;
}

ConcentrationResult concentration_result_from_json(const json& j) {
  check_schema(j, kSchemaConcentration, "concentration_result");
  require_keys(j, {"schema", "lower", "upper", "tau", "method", "witness_center"},
               "concentration_result");
  ConcentrationResult r;
  r.lower = j.at("lower").get<double>();
  r.upper = j.at("upper").get<double>();
  r.tau = j.at("tau").get<double>();
  std::string m = j.at("method").get<std::string>();
  if (m == "exact-window")
    r.method = ConcentrationMethod::exact_window;
  else if (m == "bracket-candidates")
    r.method = ConcentrationMethod::bracket_candidates;
  else if (m == "quadrature")
    r.method = ConcentrationMethod::quadrature;
  else
    throw std::invalid_argument("concentration_result: unknown method");
  if (j.contains("witness_center"))
    r.witness_center = j.at("witness_center").get<std::vector<double>>();
  return r;
}

json to_json(const EsseenEstimate& e) {
  return json{{"schema", kSchemaCharfn},
              {"value", e.value},
              {"quadrature_error", e.quadrature_error},
              {"tau", e.tau},
              {"panels", e.panels}};
}

EsseenEstimate esseen_estimate_from_json(const json& j) {
  check_schema(j, kSchemaCharfn, "esseen_estimate");
  require_keys(j, {"schema", "value", "quadrature_error", "tau", "panels"},
               "esseen_estimate");
  EsseenEstimate e;
  e.value = j.at("value").get<double>();
  e.quadrature_error = j.at("quadrature_error").get<double>();
  e.tau = j.at("tau").get<double>();
  e.panels = j.at("panels").get<std::size_t>();
  return e;
}

// ---------------------------------------------------------------------------
// progressions
// ---------------------------------------------------------------------------

json to_json(const GAP& g) {
  return json{{"schema", kSchemaProgressions}, {"kind", "gap"},      {"g0", g.g0},
              {"generators", g.gens},          {"lower", g.lo},      {"upper", g.hi}};
}

GAP gap_from_json(const json& j) {
  check_schema(j, kSchemaProgressions, "gap");
  require_keys(j, {"schema", "kind", "g0", "generators", "lower", "upper"}, "gap");
  if (j.at("kind") != "gap") throw std::invalid_argument("gap: wrong kind");
  GAP g;
  g.g0 = j.at("g0").get<std::vector<double>>();
  g.gens = j.at("generators").get<std::vector<std::vector<double>>>();
  g.lo = j.at("lower").get<std::vector<long long>>();
  g.hi = j.at("upper").get<std::vector<long long>>();
  g.validate();
  return g;
}

json to_json(const ConvexBody& v) {
  json out{{"rank", v.rank()}};
  switch (v.kind()) {
    case ConvexBody::Kind::box:
      out["kind"] = "box";
      out["radii"] = v.radii();
      break;
    case ConvexBody::Kind::ellipsoid:
      out["kind"] = "ellipsoid";
      out["radii"] = v.radii();
      break;
    case ConvexBody::Kind::slabs:
      out["kind"] = "slabs";
      out["normals"] = v.normals();
      break;
  }
  return out;
}

ConvexBody convex_body_from_json(const json& j) {
  require_keys(j, {"kind", "rank", "radii", "normals"}, "convex_body");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") return ConvexBody::box(j.at("radii").get<std::vector<double>>());
  if (kind == "ellipsoid")
    return ConvexBody::ellipsoid(j.at("radii").get<std::vector<double>>());
  if (kind == "slabs")
    return ConvexBody::slabs(j.at("rank").get<int>(),
                            j.at("normals").get<std::vector<std::vector<double>>>());
  throw std::invalid_argument("convex_body: unknown kind");
}

json to_json(const CGAP& k) {
  json blocks = json::array();
  for (const auto& b : k.blocks) {
    blocks.push_back(json{{"h", b.h}, {"body", to_json(b.body)}, {"offset", b.offset}});
  }
  return json{{"schema", kSchemaProgressions},
              {"kind", "cgap"},
              {"blocks", std::move(blocks)},
              {"m_cap", k.m_cap}};
}

CGAP cgap_from_json(const json& j) {
  check_schema(j, kSchemaProgressions, "cgap");
  require_keys(j, {"schema", "kind", "blocks", "m_cap"}, "cgap");
  if (j.at("kind") != "cgap") throw std::invalid_argument("cgap: wrong kind");
  CGAP k;
  k.m_cap = j.at("m_cap").get<std::size_t>();
  for (const auto& b : j.at("blocks")) {
    require_keys(b, {"h", "body", "offset"}, "cgap block");
    k.blocks.push_back(CgapBlock{b.at("h").get<std::vector<double>>(),
                                 convex_body_from_json(b.at("body")),
                                 b.at("offset").get<double>()});
  }
  k.validate();
  return k;
}

json to_json(const SignedCube& k) {
  return json{{"schema", kSchemaProgressions}, {"kind", "signed_cube"}, {"u", k.u}};
}

SignedCube signed_cube_from_json(const json& j) {
  check_schema(j, kSchemaProgressions, "signed_cube");
  require_keys(j, {"schema", "kind", "u"}, "signed_cube");
  if (j.at("kind") != "signed_cube") throw std::invalid_argument("signed_cube: wrong kind");
  SignedCube k;
  k.u = j.at("u").get<std::vector<std::vector<double>>>();
  return k;
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

json to_json(const BetaResult& b) {
  return json{{"schema", kSchemaStructure}, {"kind", "beta_result"},
              {"upper", b.upper},           {"witness", to_json(b.witness)},
              {"exact", b.exact},           {"r", b.r},
              {"m", b.m},                   {"tau", b.tau}};
}

BetaResult beta_result_from_json(const json& j) {
  check_schema(j, kSchemaStructure, "beta_result");
  require_keys(j, {"schema", "kind", "upper", "witness", "exact", "r", "m", "tau"},
               "beta_result");
  if (j.at("kind") != "beta_result") throw std::invalid_argument("beta_result: wrong kind");
  BetaResult b;
  b.upper = j.at("upper").get<double>();
  b.witness = cgap_from_json(j.at("witness"));
  b.exact = j.at("exact").get<bool>();
  b.r = j.at("r").get<int>();
  b.m = j.at("m").get<long long>();
  b.tau = j.at("tau").get<double>();
  return b;
}

json to_json(const StructureReport& r) {
  json targets = json::array();
  for (const auto& t : r.bound_targets) {
    targets.push_back(json{{"name", t.name},
                           {"lhs", num(t.lhs)},
                           {"rhs", num(t.rhs)},
                           {"satisfied", t.satisfied}});
  }
  json prog;
  std::string prog_kind;
  if (std::holds_alternative<CGAP>(r.progression)) {
    prog = to_json(std::get<CGAP>(r.progression));
    prog_kind = "cgap";
  } else {
    prog = to_json(std::get<SignedCube>(r.progression));
    prog_kind = "signed_cube";
  }
  return json{{"schema", kSchemaStructure},
              {"kind", "structure_report"},
              {"progression_kind", prog_kind},
              {"progression", std::move(prog)},
              {"rank", r.rank},
              {"volume", r.volume},
              {"covered", r.covered},
              {"outliers", r.outliers},
              {"residual_mass", r.residual_mass},
              {"degenerate", r.degenerate},
              {"bound_targets", std::move(targets)},
              {"coordinate_q", r.coordinate_q},
              {"coordinate_rank", r.coordinate_rank},
              {"coordinate_volume", r.coordinate_volume}};
}

StructureReport structure_report_from_json(const json& j) {
  check_schema(j, kSchemaStructure, "structure_report");
  require_keys(j,
               {"schema", "kind", "progression_kind", "progression", "rank", "volume",
                "covered", "outliers", "residual_mass", "degenerate", "bound_targets",
                "coordinate_q", "coordinate_rank", "coordinate_volume"},
               "structure_report");
  if (j.at("kind") != "structure_report")
    throw std::invalid_argument("structure_report: wrong kind");
  StructureReport r;
  if (j.at("progression_kind") == "cgap")
    r.progression = cgap_from_json(j.at("progression"));
  else
    r.progression = signed_cube_from_json(j.at("progression"));
  r.rank = j.at("rank").get<int>();
  r.volume = j.at("volume").get<long long>();
  r.covered = j.at("covered").get<std::size_t>();
  r.outliers = j.at("outliers").get<std::vector<std::size_t>>();
  r.residual_mass = j.at("residual_mass").get<double>();
  r.degenerate = j.at("degenerate").get<bool>();
  for (const auto& t : j.at("bound_targets")) {
    require_keys(t, {"name", "lhs", "rhs", "satisfied"}, "bound_target");
    r.bound_targets.push_back(BoundTarget{t.at("name").get<std::string>(),
                                          num_from(t.at("lhs"), "bound_target.lhs"),
                                          num_from(t.at("rhs"), "bound_target.rhs"),
                                          t.at("satisfied").get<bool>()});
  }
  r.coordinate_q = j.at("coordinate_q").get<std::vector<double>>();
  r.coordinate_rank = j.at("coordinate_rank").get<std::vector<int>>();
  r.coordinate_volume = j.at("coordinate_volume").get<std::vector<long long>>();
  return r;
}

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

json to_json(const SuiteRecord& r) {
  json out{{"schema", kSchemaHarness}, {"kind", "suite_record"},
           {"case_id", r.case_id},     {"digest", r.digest},
           {"lhs", r.lhs},             {"rhs", r.rhs},
           {"identity", r.identity}};
  out["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
  out["pass"] = r.pass ? json(*r.pass) : json(nullptr);
  return out;
}

SuiteRecord suite_record_from_json(const json& j) {
  check_schema(j, kSchemaHarness, "suite_record");
  require_keys(
      j, {"schema", "kind", "case_id", "digest", "lhs", "rhs", "identity", "ratio", "pass"},
      "suite_record");
  if (j.at("kind") != "suite_record")
    throw std::invalid_argument("suite_record: wrong kind");
  SuiteRecord r;
  r.case_id = j.at("case_id").get<std::string>();
  r.digest = j.at("digest").get<std::string>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.identity = j.at("identity").get<std::string>();
  if (!j.at("ratio").is_null()) r.ratio = j.at("ratio").get<double>();
  if (!j.at("pass").is_null()) r.pass = j.at("pass").get<bool>();
  return r;
}

json to_json(const CalibrationTable& t) {
  json stats = json::object();
  for (const auto& [id, st] : t) {
    stats[id] = json{{"count", st.count}, {"min", st.min},
                     {"max", st.max},     {"median", st.median},
                     {"q10", st.q10},     {"q90", st.q90}};
  }
  return json{{"schema", kSchemaHarness}, {"kind", "calibration"}, {"identities", stats}};
}

CalibrationTable calibration_table_from_json(const json& j) {
  check_schema(j, kSchemaHarness, "calibration");
  require_keys(j, {"schema", "kind", "identities"}, "calibration");
  if (j.at("kind") != "calibration") throw std::invalid_argument("calibration: wrong kind");
  CalibrationTable t;
  for (auto it = j.at("identities").begin(); it != j.at("identities").end(); ++it) {
    const json& st = it.value();
    require_keys(st, {"count", "min", "max", "median", "q10", "q90"}, "calibration stats");
    IdentityStats s;
    s.count = st.at("count").get<std::size_t>();
    s.min = st.at("min").get<double>();
    s.max = st.at("max").get<double>();
    s.median = st.at("median").get<double>();
    s.q10 = st.at("q10").get<double>();
    s.q90 = st.at("q90").get<double>();
    t[it.key()] = s;
  }
  return t;
}

}  // namespace conclab
