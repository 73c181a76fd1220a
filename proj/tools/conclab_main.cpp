// conclab: exact and quadrature-based concentration functions of weighted
// sums, compound Poisson smoothing laws, progression fitting, and the
// verification suite.  One subcommand per capability; JSON in, JSON/CSV out.
//
// Exit codes: 0 success, 2 invalid input, 3 cap exceeded, 4 verification
// failure.  No other codes are emitted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "conclab/json_io.hpp"

namespace {

using conclab::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitCap = 3;
constexpr int kExitVerify = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_inline_or_file(const std::string& arg) {
  if (!arg.empty() && arg.front() == '@') return json::parse(slurp(arg.substr(1)));
  return json::parse(arg);
}

conclab::CoefficientVector parse_coefficients(const std::string& arg) {
  json j = load_inline_or_file(arg);
  if (j.is_array()) {
    // bare array: either scalars or rows
    std::vector<double> flat;
    int d = 1;
    if (!j.empty() && j.front().is_array()) {
      d = static_cast<int>(j.front().size());
      for (const auto& row : j) {
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
    } else {
      for (const auto& v : j) flat.push_back(v.get<double>());
    }
    return conclab::CoefficientVector(std::move(flat), d);
  }
  return conclab::coefficient_vector_from_json(j);
}

conclab::DiscreteDistribution parse_law(const std::string& arg) {
  if (arg == "rademacher") return conclab::rademacher();
  if (arg.rfind("lazy:", 0) == 0) {
    double p = std::stod(arg.substr(5));
    return conclab::lazy_rademacher(p);
  }
  return conclab::discrete_distribution_from_json(load_inline_or_file(arg));
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty() || out_path == "-") {
    std::cout << payload << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write file: " + out_path);
  out << payload;
}

int default_threads() {
  if (const char* env = std::getenv("CONCLAB_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for concentration functions of weighted sums"};
  app.require_subcommand(1);

  std::string out_path;
  app.add_option("--output,-o", out_path, "output path (default: stdout)");

  // ---- concentration ----
  auto* c_cmd = app.add_subcommand("concentration", "Q(F_a, tau) of an exact sum law");
  std::string c_a, c_x = "rademacher";
  double c_tau = 0.0;
  std::size_t c_cap = conclab::kDefaultAtomCap;
  c_cmd->add_option("--a", c_a, "coefficients: JSON array / @file")->required();
  c_cmd->add_option("--x", c_x, "scalar law: rademacher | lazy:<p> | JSON/@file");
  c_cmd->add_option("--tau", c_tau, "window scale tau >= 0");
  c_cmd->add_option("--atom-cap", c_cap, "intermediate support cap");

  // ---- detect ----
  auto* d_cmd = app.add_subcommand("detect", "inverse structure detection");
  std::string d_a, d_x = "rademacher";
  double d_tau = 0.0, d_rho = 1.0;
  std::size_t d_nprime = 0;
  long long d_mcap = 101;
  double d_calib = 1.0;
  d_cmd->add_option("--a", d_a, "coefficients: JSON array / @file")->required();
  d_cmd->add_option("--x", d_x, "scalar law");
  d_cmd->add_option("--tau", d_tau, "closeness scale");
  d_cmd->add_option("--rho", d_rho, "tolerance multiplier rho in (0,1]");
  d_cmd->add_option("--nprime", d_nprime, "per-coordinate outlier allowance");
  d_cmd->add_option("--m-cap", d_mcap, "default per-coordinate volume cap");
  d_cmd->add_option("--calibration", d_calib, "calibration constant for bound targets");

  // ---- fit ----
  auto* f_cmd = app.add_subcommand("fit", "rank-1 progression fit of scalar values");
  std::string f_values;
  double f_tau = 0.0;
  long long f_mcap = 101;
  std::size_t f_budget = 0;
  f_cmd->add_option("--values", f_values, "JSON array of reals / @file")->required();
  f_cmd->add_option("--tau", f_tau, "coverage tolerance");
  f_cmd->add_option("--m-cap", f_mcap, "volume cap (2L+1 <= m-cap)");
  f_cmd->add_option("--outlier-budget", f_budget, "stop escalating once met");

  // ---- beta ----
  auto* b_cmd = app.add_subcommand("beta", "progression escape mass beta_{r,m}(W, tau)");
  std::string b_w;
  int b_r = 1;
  long long b_m = 3;
  double b_tau = 0.0;
  bool b_exact = false;
  std::size_t b_budget = 200000;
  std::uint64_t b_seed = 0;
  b_cmd->add_option("--w", b_w, "spectral measure JSON / @file")->required();
  b_cmd->add_option("--r", b_r, "rank");
  b_cmd->add_option("--m", b_m, "volume cap");
  b_cmd->add_option("--tau", b_tau, "neighborhood scale");
  b_cmd->add_flag("--exact", b_exact, "exhaustive rank-1 path (rational support)");
  b_cmd->add_option("--budget", b_budget, "candidate evaluation budget");
  b_cmd->add_option("--seed", b_seed, "search seed");

  // ---- hdist ----
  auto* h_cmd = app.add_subcommand("hdist", "Q of the compound Poisson smoothing law");
  std::string h_a;
  double h_lambda = 1.0, h_kappa = 1.0, h_tol = 1e-9;
  bool h_law = false;
  h_cmd->add_option("--a", h_a, "coefficients: JSON array / @file")->required();
  h_cmd->add_option("--lambda", h_lambda, "Levy weight lambda in [0,1]");
  h_cmd->add_option("--kappa", h_kappa, "scale kappa > 0");
  h_cmd->add_option("--tol", h_tol, "quadrature tolerance");
  h_cmd->add_flag("--law", h_law, "also emit the full lattice law when available");

  // ---- essen ----
  auto* e_cmd = app.add_subcommand("essen", "Esseen integral tau^d int |cf|");
  std::string e_f, e_a;
  double e_tau = 1.0, e_tol = 1e-9, e_lambda = 1.0;
  e_cmd->add_option("--f", e_f, "discrete law JSON / @file");
  e_cmd->add_option("--a", e_a, "coefficients for the smoothing law instead of --f");
  e_cmd->add_option("--lambda", e_lambda, "Levy weight for --a");
  e_cmd->add_option("--tau", e_tau, "scale tau > 0");
  e_cmd->add_option("--tol", e_tol, "quadrature tolerance");

  // ---- verify ----
  auto* v_cmd = app.add_subcommand("verify", "run the identity suite");
  std::string v_suite = "default";
  std::uint64_t v_seed = 7;
  int v_threads = default_threads();
  std::string v_csv, v_json, v_baseline;
  v_cmd->add_option("--suite", v_suite, "suite name (default | quick)");
  v_cmd->add_option("--seed", v_seed, "suite seed");
  v_cmd->add_option("--threads", v_threads, "worker thread cap");
  v_cmd->add_option("--out-csv", v_csv, "CSV output path");
  v_cmd->add_option("--out-json", v_json, "JSON summary output path");
  v_cmd->add_option("--baseline", v_baseline, "calibration baseline for drift gating");

  // ---- plant ----
  auto* p_cmd = app.add_subcommand("plant", "generate a planted instance");
  int p_rank = 1;
  std::vector<double> p_steps;
  long long p_volume = 5;
  std::size_t p_n = 16, p_outliers = 0;
  double p_noise = 0.0;
  std::uint64_t p_seed = 1;
  p_cmd->add_option("--rank", p_rank, "number of coordinates");
  p_cmd->add_option("--step", p_steps, "per-coordinate steps");
  p_cmd->add_option("--volume", p_volume, "target progression volume");
  p_cmd->add_option("--n", p_n, "number of coefficients");
  p_cmd->add_option("--outliers", p_outliers, "far entries");
  p_cmd->add_option("--noise", p_noise, "max-norm noise on inliers");
  p_cmd->add_option("--seed", p_seed, "generator seed");

  for (CLI::App* sub : {c_cmd, d_cmd, f_cmd, b_cmd, h_cmd, e_cmd, v_cmd, p_cmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*c_cmd) {
      if (!(c_tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
      auto a = parse_coefficients(c_a);
      auto x = parse_law(c_x);
      auto law = conclab::exact_sum_distribution(a, x, c_cap);
      emit(out_path, conclab::to_json(conclab::concentration(law, c_tau)).dump(2));
    } else if (*d_cmd) {
      auto a = parse_coefficients(d_a);
      auto x = parse_law(d_x);
      conclab::DetectConfig cfg;
      cfg.m_cap_default = d_mcap;
      cfg.calibration_c = d_calib;
      auto report = conclab::inverse_detect(a, x, d_tau, d_rho, d_nprime, cfg);
      emit(out_path, conclab::to_json(report).dump(2));
    } else if (*f_cmd) {
      json vals = load_inline_or_file(f_values);
      std::vector<double> values = vals.get<std::vector<double>>();
      auto fit = conclab::fit_progression_1d(values, f_tau, f_mcap, f_budget);
      json out{{"schema", conclab::kSchemaStructure},
               {"kind", "fit_result"},
               {"progression", conclab::to_json(fit.progression)},
               {"outliers", fit.outliers},
               {"step", fit.step},
               {"offset", fit.offset},
               {"volume", fit.volume}};
      emit(out_path, out.dump(2));
    } else if (*b_cmd) {
      auto w = conclab::spectral_measure_from_json(load_inline_or_file(b_w));
      conclab::BetaResult res =
          b_exact ? conclab::beta_exact_rank1(w, b_m, b_tau)
                  : conclab::beta_upper(w, b_r, b_m, b_tau, b_budget, b_seed);
      emit(out_path, conclab::to_json(res).dump(2));
    } else if (*h_cmd) {
      auto a = parse_coefficients(h_a);
      auto sc = conclab::smoothed_concentration(a, h_lambda, h_kappa, h_tol);
      json out{{"schema", conclab::kSchemaCharfn},
               {"kind", "smoothed_concentration"},
               {"value", sc.value},
               {"error", sc.error},
               {"path", conclab::to_string(sc.path)}};
      if (h_law && sc.path == conclab::QPath::inversion_exact) {
        auto spec = conclab::weighted_sum_levy_spec(a, h_lambda);
        out["law"] = conclab::to_json(conclab::lattice_law(spec, h_tol));
      }
      emit(out_path, out.dump(2));
    } else if (*e_cmd) {
      conclab::EsseenEstimate est;
      if (!e_f.empty()) {
        auto f = conclab::discrete_distribution_from_json(load_inline_or_file(e_f));
        est = conclab::esseen_integral(f, e_tau, conclab::QuadratureLimits{e_tol, 1u << 18});
      } else if (!e_a.empty()) {
        auto a = parse_coefficients(e_a);
        auto spec = conclab::weighted_sum_levy_spec(a, e_lambda);
        est = conclab::esseen_integral(spec, e_tau, conclab::QuadratureLimits{e_tol, 1u << 18});
      } else {
        throw std::invalid_argument("essen: provide --f or --a");
      }
      emit(out_path, conclab::to_json(est).dump(2));
    } else if (*v_cmd) {
      conclab::SuiteConfig cfg;
      cfg.seed = v_seed;
      cfg.threads = v_threads;
      if (v_suite == "quick") {
        cfg.cases_regularity = 40;
        cfg.cases_scaling = 12;
        cfg.cases_cf_bound = 10;
        cfg.cases_smoothing = 8;
        cfg.cases_sandwich = 16;
        cfg.cases_arak = 8;
        cfg.cases_inverse_shape = 8;
        cfg.cases_cube_shape = 8;
      } else if (v_suite != "default") {
        throw std::invalid_argument("verify: unknown suite '" + v_suite + "'");
      }
      auto records = conclab::run_suite(cfg);
      std::string csv = conclab::suite_csv(records);
      if (!v_csv.empty()) emit(v_csv, csv);
      auto table = conclab::calibrate(records);
      bool constant_free_failure = false;
      std::size_t failures = 0;
      for (const auto& r : records) {
        if (r.pass && !*r.pass) {
          constant_free_failure = true;
          ++failures;
        }
      }
      std::vector<std::string> drift;
      if (!v_baseline.empty()) {
        auto baseline = conclab::calibration_table_from_json(json::parse(slurp(v_baseline)));
        drift = conclab::check_drift(table, baseline);
      }
      json summary{{"schema", conclab::kSchemaHarness},
                   {"kind", "verify_summary"},
                   {"suite", v_suite},
                   {"seed", v_seed},
                   {"records", records.size()},
                   {"failures", failures},
                   {"drift_violations", drift},
                   {"calibration", conclab::to_json(table)}};
      if (!v_json.empty())
        emit(v_json, summary.dump(2));
      else
        emit(out_path, summary.dump(2));
      if (constant_free_failure || !drift.empty()) return kExitVerify;
    } else if (*p_cmd) {
      auto inst =
          conclab::planted_instance(p_rank, p_steps, p_volume, p_n, p_outliers, p_noise, p_seed);
      json out{{"schema", conclab::kSchemaHarness},
               {"kind", "planted_instance"},
               {"coefficients", conclab::to_json(inst.coefficients)},
               {"truth", conclab::to_json(inst.truth)},
               {"outliers", inst.outlier_indices},
               {"volume", inst.volume}};
      emit(out_path, out.dump(2));
    }
  } catch (const conclab::cap_exceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
