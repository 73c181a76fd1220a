#include "conclab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace conclab {

namespace {

// deterministic RNG wrapper; the mapping from raw draws to values is fixed
// here so results do not depend on the standard library's distributions
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  std::uint64_t next() { return eng(); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double pick(std::initializer_list<double> xs) {
    auto it = xs.begin();
    std::advance(it, uniform_int(0, static_cast<std::int64_t>(xs.size()) - 1));
    return *it;
  }
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// instance families (exact-rational, d = 1)
// ---------------------------------------------------------------------------

struct ExactInstance {
  std::vector<std::int64_t> ints;
  RationalCoefficients a;
  RationalDistribution x;
  bool lazy = false;
  Rational lazy_p{1};
  std::string descr;
};

ExactInstance random_exact_instance(Rng& rng, std::size_t max_n, bool allow_lazy) {
  std::size_t n = static_cast<std::size_t>(rng.uniform_int(4, static_cast<std::int64_t>(max_n)));
  int mode = static_cast<int>(rng.uniform_int(0, 3));
  std::vector<std::int64_t> ints;
  switch (mode) {
    case 0: {  // uniform small integers, heavy collisions
      for (std::size_t i = 0; i < n; ++i) ints.push_back(rng.uniform_int(1, 12));
      break;
    }
    case 1: {  // planted arithmetic progression with repeats
      std::int64_t h = rng.uniform_int(2, 6);
      std::int64_t L = rng.uniform_int(1, 4);
      for (std::size_t i = 0; i < n; ++i)
        ints.push_back(h * rng.uniform_int(1, 2 * L + 1));
      break;
    }
    case 2: {  // dissociated powers of two (capped to keep torus grids small)
      n = std::min<std::size_t>(n, 7);
      for (std::size_t i = 0; i < n; ++i) ints.push_back(std::int64_t(1) << i);
      break;
    }
    default: {  // progression plus a few strays
      std::int64_t h = rng.uniform_int(2, 5);
      for (std::size_t i = 0; i + 2 < n; ++i) ints.push_back(h * rng.uniform_int(1, 4));
      ints.push_back(rng.uniform_int(13, 40));
      ints.push_back(rng.uniform_int(13, 40));
      break;
    }
  }
  bool lazy = allow_lazy && (rng.uniform_int(0, 2) == 0);
  Rational p(1);
  RationalDistribution x = rademacher_exact();
  if (lazy) {
    p = Rational(1, rng.uniform_int(1, 3) * 2);  // 1/2, 1/4, 1/6
    x = lazy_rademacher_exact(p);
  }
  std::ostringstream d;
  d << "mode=" << mode << ";n=" << ints.size() << ";lazy=" << lazy << ";a=";
  for (auto v : ints) d << v << ",";
  ExactInstance inst{std::move(ints), RationalCoefficients::from_integers({1}), std::move(x),
                     lazy, p, d.str()};
  inst.a = RationalCoefficients::from_integers(inst.ints);
  return inst;
}

// The first few cases of every ratio-bearing family are fixed structured
// instances shared by all seeds; calibration extremes are realized on these
// corners, which keeps the recorded constants stable across seeds.
ExactInstance canonical_or_random(Rng& rng, std::size_t idx, std::size_t max_n,
                                  bool allow_lazy) {
  static const std::vector<std::vector<std::int64_t>> kCanonical = {
      {1, 1, 1, 1, 1, 1, 1, 1},
      {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
      {3, 6, 9, 12, 3, 6, 9, 12, 3, 6},
      {1, 2, 4, 8, 16, 32, 64},
      {1, 1, 1, 1, 1, 1, 1, 1},
      {2, 4, 6, 8, 10, 2, 4, 6, 8, 10},
      {1, 1, 2, 2, 3, 3, 4, 4},
      {5, 5, 5, 7, 7, 7, 11, 11},
  };
  if (idx < kCanonical.size()) {
    bool lazy = allow_lazy && (idx == 4 || idx == 5);
    RationalDistribution x = lazy ? lazy_rademacher_exact(Rational(1, 2)) : rademacher_exact();
    std::ostringstream d;
    d << "canonical=" << idx << ";lazy=" << lazy;
    ExactInstance inst{kCanonical[idx], RationalCoefficients::from_integers(kCanonical[idx]),
                       std::move(x), lazy, Rational(1, 2), d.str()};
    return inst;
  }
  return random_exact_instance(rng, max_n, allow_lazy);
}

SuiteRecord error_record(const std::string& case_id, const std::string& identity,
                         const std::string& what) {
  SuiteRecord r;
  r.case_id = case_id;
  r.identity = identity;
  r.digest = "error:" + what;
  r.pass = false;
  return r;
}

SuiteRecord make_record(const std::string& case_id, const std::string& identity,
                        const std::string& inputs, double lhs, double rhs,
                        std::optional<bool> pass) {
  SuiteRecord r;
  r.case_id = case_id;
  r.identity = identity;
  r.digest = hex64(fnv1a(inputs));
  r.lhs = lhs;
  r.rhs = rhs;
  if (rhs > 0.0) {
    r.ratio = lhs / rhs;
  } else if (lhs > 0.0) {
    r.pass = false;  // rhs == 0 < lhs is a hard failure
    return r;
  }
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------------------
// per-identity case runners
// ---------------------------------------------------------------------------

SuiteRecord run_regularity_case(std::uint64_t seed, std::size_t idx) {
  std::string cid = "regularity/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = random_exact_instance(rng, 14, true);
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  static const Rational kRatios[4] = {Rational(1, 2), Rational(1), Rational(2),
                                      Rational(5, 2)};
  Rational lambda(rng.uniform_int(1, 4), 2);  // 1/2 .. 2
  Rational ratio = kRatios[idx % 4];
  Rational mu = lambda * ratio;
  Rational q_mu = concentration_exact(f, mu).value;
  Rational q_lambda = concentration_exact(f, lambda).value;
  long long factor = regularity_factor(mu, lambda, 1);
  bool pass = q_mu <= Rational(factor) * q_lambda;
  return make_record(cid, kIdentityRegularity,
                     inst.descr + ";mu=" + mu.str() + ";lambda=" + lambda.str(),
                     q_mu.to_double(), static_cast<double>(factor) * q_lambda.to_double(),
                     pass);
}

SuiteRecord run_scaling_case(std::uint64_t seed, std::size_t idx) {
  std::string cid = "scaling/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = random_exact_instance(rng, 14, true);
  static const Rational kV[3] = {Rational(1, 3), Rational(2), Rational(7)};
  Rational v = kV[idx % 3];
  Rational tau(rng.uniform_int(0, 3));
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  RationalDistribution fv = exact_sum_distribution(scale_coefficients(inst.a, v), inst.x);
  Rational lhs = concentration_exact(f, tau).value;
  Rational rhs = concentration_exact(fv, tau * v).value;
  bool pass = lhs == rhs;
  return make_record(cid, kIdentityScaling,
                     inst.descr + ";v=" + v.str() + ";tau=" + tau.str(), lhs.to_double(),
                     rhs.to_double(), pass);
}

SuiteRecord run_cf_bound_case(std::uint64_t seed, std::size_t idx, std::size_t grid) {
  std::string cid = "cf-bound/" + std::to_string(idx);
  Rng rng(seed);
  // random atomic law on small integers
  std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 6));
  std::vector<double> pts;
  std::vector<double> ws;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    pts.push_back(static_cast<double>(rng.uniform_int(-10, 10)));
    double w = static_cast<double>(rng.uniform_int(1, 8));
    ws.push_back(w);
    total += w;
  }
  for (double& w : ws) w /= total;
  DiscreteDistribution w_law(1, std::move(pts), std::move(ws));
  double worst_slack = -kInfinity;
  double lhs = 0.0, rhs = 1.0;
  for (std::size_t i = 0; i < grid; ++i) {
    double t = -20.0 + 40.0 * rng.uniform();
    double tv[1] = {t};
    double b = std::abs(cf_eval(w_law, std::span<const double>(tv, 1)));
    double bound = std::exp(-0.5 * (1.0 - b * b));
    if (b - bound > worst_slack) {
      worst_slack = b - bound;
      lhs = b;
      rhs = bound;
    }
  }
  bool pass = worst_slack <= 1e-12;
  std::ostringstream d;
  d << "atoms=" << w_law.size() << ";grid=" << grid << ";case=" << idx;
  return make_record(cid, kIdentityCfBound, d.str(), lhs, rhs, pass);
}

SuiteRecord run_smoothing_q_case(std::uint64_t seed, std::size_t idx, double tol) {
  std::string cid = "smoothing-q/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 10, true);
  Rational tau(rng.uniform_int(1, 2));
  Rational kappa = tau;  // p(tau/kappa) = p(1)
  RationalDistribution g = symmetrize(inst.x);
  double p1 = tail_mass(g, Rational(1)).to_double();
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  double lhs = concentration_exact(f, tau).value.to_double();
  auto sc = smoothed_concentration(inst.a.to_double(), p1, kappa.to_double(), tol);
  return make_record(cid, kIdentitySmoothingQ,
                     inst.descr + ";tau=" + tau.str() + ";path=" + to_string(sc.path), lhs,
                     sc.value, std::nullopt);
}

SuiteRecord run_smoothing_floored_case(std::uint64_t seed, std::size_t idx, double tol) {
  std::string cid = "smoothing-q-floored/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 10, true);
  double tau = static_cast<double>(rng.uniform_int(1, 2));
  double kappa = tau;
  static const double kDelta[3] = {0.5, 1.0, 2.0};
  double delta = kDelta[idx % 3];
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  double lhs = concentration_exact(f, Rational::from_double_exact(tau)).value.to_double();
  double rhs = smoothed_concentration_bound(inst.a.to_double(), inst.x.to_double(), tau,
                                            kappa, delta, tol);
  return make_record(cid, kIdentitySmoothingQFloored,
                     inst.descr + ";tau=" + fmt17(tau) + ";delta=" + fmt17(delta), lhs, rhs,
                     std::nullopt);
}

SuiteRecord run_smoothing_zero_case(std::uint64_t seed, std::size_t idx, double tol) {
  std::string cid = "smoothing-zero/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 10, true);
  RationalDistribution g = symmetrize(inst.x);
  std::vector<Rational> origin{Rational(0)};
  double p0 = (Rational(1) - g.mass_at(origin)).to_double();
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  double lhs = concentration_exact(f, Rational(0)).value.to_double();
  CompoundPoissonSpec spec = weighted_sum_levy_spec(inst.a.to_double(), p0);
  long long zero[1] = {0};
  double rhs = lattice_inversion(spec, std::span<const long long>(zero, 1), tol);
  return make_record(cid, kIdentitySmoothingZero, inst.descr + ";p0=" + fmt17(p0), lhs, rhs,
                     std::nullopt);
}

SuiteRecord run_sandwich_case(std::uint64_t seed, std::size_t idx, double tol) {
  std::string cid = "sandwich-band/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx % 16, 10, false);
  static const double kLambda[4] = {0.25, 0.5, 0.75, 1.0};
  static const double kTau[3] = {0.5, 1.0, 2.0};
  double lambda = kLambda[idx % 4];
  double tau = kTau[(idx / 4) % 3];
  CompoundPoissonSpec spec = weighted_sum_levy_spec(inst.a.to_double(), lambda);
  DiscreteDistribution law = lattice_law(spec, tol);
  double q = concentration(law, tau).upper;
  EsseenEstimate e = esseen_integral(spec, tau, QuadratureLimits{tol, 1u << 18});
  return make_record(cid, kIdentitySandwich,
                     inst.descr + ";lambda=" + fmt17(lambda) + ";tau=" + fmt17(tau), q,
                     e.value, std::nullopt);
}

SuiteRecord run_arak_case(std::uint64_t seed, std::size_t idx) {
  std::string cid = "arak-spectral/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 12, true);
  double tau = (idx % 2 == 0) ? 0.0 : 1.0;
  double kappa = 1.0;
  double delta = (idx % 4 < 2) ? 1.0 : 0.5;
  long long m = 2 * rng.uniform_int(1, 4) + 1;  // 3..9
  RationalDistribution g = symmetrize(inst.x);
  double p = tail_mass(g, Rational::from_double_exact(tau / kappa)).to_double();
  CoefficientVector a = inst.a.to_double();
  SpectralTriple triple = spectral_measures(a, p);
  double beta_delta = tau == 0.0 ? 0.0 : delta;
  BetaResult beta = beta_exact_rank1(triple.tail_scaled, m, beta_delta);
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  double lhs = concentration_exact(f, Rational::from_double_exact(tau)).value.to_double();
  double rhs = tau == 0.0 ? arak_bound_rhs(beta.upper, 1, m, 1.0)
                          : arak_bound_rhs_floored(beta.upper, 1, m, 1.0, kappa, delta);
  if (!std::isfinite(rhs)) rhs = std::numeric_limits<double>::max();
  return make_record(cid, kIdentityArakSpectral,
                     inst.descr + ";tau=" + fmt17(tau) + ";m=" + std::to_string(m), lhs,
                     rhs, std::nullopt);
}

SuiteRecord run_inverse_shape_case(std::uint64_t seed, std::size_t idx) {
  std::string cid = "inverse-shape/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 12, true);
  double tau = (idx % 2 == 0) ? 0.0 : 1.0;
  double rho = (idx % 4 < 2) ? 1.0 : 0.5;
  std::size_t n = inst.a.size();
  std::size_t n_prime = std::max<std::size_t>(1, n / 4);
  RationalDistribution g = symmetrize(inst.x);
  double p1 = tail_mass(g, Rational(1)).to_double();
  RationalDistribution f = exact_sum_distribution(inst.a, inst.x);
  Rational tau_r = Rational::from_double_exact(tau);
  double q = concentration_exact(f, tau_r).value.to_double();
  double rho_eff = tau == 0.0 ? 1.0 : rho;
  long long m = 101;
  if (p1 > 0.0 && q > 0.0) {
    double y = 4.0 / (rho_eff * q * std::sqrt(p1 * static_cast<double>(n_prime) / 4.0));
    if (std::isfinite(y)) m = std::clamp<long long>(strict_floor(y) + 1, 1, 100001);
  }
  CoefficientVector a = inst.a.to_double();
  SpectralTriple triple = spectral_measures(a, p1);
  double delta_n = tau * rho;
  BetaResult beta = beta_upper(triple.tail_scaled, 1, m, delta_n, 100000, seed);
  double rhs = tau == 0.0 ? arak_bound_rhs(beta.upper, 1, m, 1.0)
                          : 2.0 / rho * arak_bound_rhs(beta.upper, 1, m, 1.0);
  if (!std::isfinite(rhs)) rhs = std::numeric_limits<double>::max();
  return make_record(cid, kIdentityInverseShape,
                     inst.descr + ";tau=" + fmt17(tau) + ";rho=" + fmt17(rho), q, rhs,
                     std::nullopt);
}

SuiteRecord run_cube_shape_case(std::uint64_t seed, std::size_t idx) {
  std::string cid = "cube-shape/" + std::to_string(idx);
  Rng rng(seed);
  ExactInstance inst = canonical_or_random(rng, idx, 12, true);
  double tau = (idx % 2 == 0) ? 1.0 : 2.0;
  double delta = (idx % 4 < 2) ? 0.5 : 1.0;
  K1Config cfg;
  cfg.rank_cap_c = 1.0;  // tight cap so nonzero residuals appear
  cfg.rank_cap_abs = 6;
  std::vector<double> taus{tau};
  std::vector<double> deltas{delta};
  StructureReport rep =
      k1_structure_report(inst.a.to_double(), inst.x.to_double(), taus, deltas, cfg);
  double rhs = 0.0;
  for (int j = 0; j < 1; ++j) {
    double term = std::fabs(std::log(rep.coordinate_q[j])) + std::log(tau / delta) + 1.0;
    rhs += term * term * term;
  }
  return make_record(cid, kIdentityCubeShape,
                     inst.descr + ";tau=" + fmt17(tau) + ";delta=" + fmt17(delta),
                     rep.residual_mass, rhs, std::nullopt);
}

// ---------------------------------------------------------------------------
// deterministic parallel map: results land in preassigned slots
// ---------------------------------------------------------------------------

void parallel_cases(std::size_t count, int threads,
                    const std::function<SuiteRecord(std::size_t)>& body,
                    std::vector<SuiteRecord>& out) {
  std::size_t base = out.size();
  out.resize(base + count);
  int nthreads = std::clamp(threads, 1, 64);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[base + i] = body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> cursor{0};
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= count) break;
        out[base + i] = body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

// ---------------------------------------------------------------------------
// planted instances
// ---------------------------------------------------------------------------

PlantedInstance planted_instance(int rank, const std::vector<double>& step_profile,
                                 long long volume, std::size_t n, std::size_t outliers,
                                 double noise_tau, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("planted_instance: rank >= 1");
  if (volume < 1) throw std::invalid_argument("planted_instance: volume >= 1");
  if (outliers > n) throw std::invalid_argument("planted_instance: outliers <= n");
  if (!(noise_tau >= 0.0)) throw std::invalid_argument("planted_instance: noise_tau >= 0");
  const int d = rank;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<double> steps(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    steps[j] = step_profile.empty()
                   ? static_cast<double>(3 + 2 * j)
                   : step_profile[static_cast<std::size_t>(j) % step_profile.size()];
    if (!(steps[j] > 0.0)) throw std::invalid_argument("planted_instance: steps > 0");
  }
  // split the volume into per-coordinate odd factors
  long long per = std::max<long long>(
      1, static_cast<long long>(std::floor(std::pow(static_cast<double>(volume),
                                                    1.0 / static_cast<double>(d)))));
  if (per % 2 == 0) --per;
  per = std::max<long long>(per, 1);
  std::vector<long long> halves(static_cast<std::size_t>(d), (per - 1) / 2);

  std::vector<CGAP> blocks;
  long long vol = 1;
  std::vector<double> offsets(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    offsets[j] = steps[j] * static_cast<double>(rng.uniform_int(-2, 2));
    blocks.push_back(CGAP::rank1(steps[j], offsets[j], halves[j]));
    vol *= 2 * halves[j] + 1;
  }

  // outlier positions via partial Fisher-Yates
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < outliers && i + 1 < n; ++i) {
    std::size_t k = i + static_cast<std::size_t>(
                            rng.uniform_int(0, static_cast<std::int64_t>(n - i - 1)));
    std::swap(order[i], order[k]);
  }
  std::vector<bool> is_outlier(n, false);
  std::vector<std::size_t> outlier_idx(order.begin(), order.begin() + outliers);
  for (std::size_t i : outlier_idx) is_outlier[i] = true;
  std::sort(outlier_idx.begin(), outlier_idx.end());

  std::vector<double> entries(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      double v;
      if (is_outlier[i]) {
        // far shell, pinned halfway between consecutive step multiples so that
        // no short progression on the same step reaches it
        double diam = 2.0 * static_cast<double>(halves[j]) * steps[j] + steps[j];
        double base = 10.0 * diam * (1.0 + rng.uniform());
        double q = std::floor(base / steps[j]) + 0.5;
        double sign = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
        v = sign * q * steps[j];
      } else {
        long long pos = rng.uniform_int(-halves[j], halves[j]);
        double noise = noise_tau == 0.0 ? 0.0 : (2.0 * rng.uniform() - 1.0) * noise_tau;
        v = offsets[j] + static_cast<double>(pos) * steps[j] + noise;
      }
      entries[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = v;
    }
  }
  PlantedInstance inst{CoefficientVector(std::move(entries), d), product(blocks),
                       std::move(outlier_idx), vol};
  return inst;
}

// ---------------------------------------------------------------------------
// suite driver
// ---------------------------------------------------------------------------

namespace {

std::uint64_t case_seed(std::uint64_t master, const char* identity, std::size_t idx) {
  return fnv1a(std::string(identity) + "#" + std::to_string(idx)) ^
         (master * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL);
}

template <typename Fn>
std::function<SuiteRecord(std::size_t)> guarded(const char* identity, Fn fn) {
  return [identity, fn](std::size_t idx) -> SuiteRecord {
    try {
      return fn(idx);
    } catch (const std::exception& e) {
      return error_record(std::string(identity) + "/" + std::to_string(idx), identity,
                          e.what());
    }
  };
}

}  // namespace

std::vector<SuiteRecord> run_suite(const SuiteConfig& config) {
  std::vector<SuiteRecord> out;
  const std::uint64_t s = config.seed;
  const double tol = config.quadrature_tol;

  parallel_cases(config.cases_regularity, config.threads,
                 guarded(kIdentityRegularity,
                         [&](std::size_t i) {
                           return run_regularity_case(case_seed(s, "regularity", i), i);
                         }),
                 out);
  parallel_cases(config.cases_scaling, config.threads,
                 guarded(kIdentityScaling,
                         [&](std::size_t i) {
                           return run_scaling_case(case_seed(s, "scaling", i), i);
                         }),
                 out);
  parallel_cases(config.cases_cf_bound, config.threads,
                 guarded(kIdentityCfBound,
                         [&](std::size_t i) {
                           return run_cf_bound_case(case_seed(s, "cf", i), i,
                                                    config.cf_grid_points);
                         }),
                 out);
  parallel_cases(config.cases_smoothing, config.threads,
                 guarded(kIdentitySmoothingQ,
                         [&](std::size_t i) {
                           return run_smoothing_q_case(case_seed(s, "smq", i), i, tol);
                         }),
                 out);
  parallel_cases(config.cases_smoothing, config.threads,
                 guarded(kIdentitySmoothingQFloored,
                         [&](std::size_t i) {
                           return run_smoothing_floored_case(case_seed(s, "smf", i), i, tol);
                         }),
                 out);
  parallel_cases(config.cases_smoothing, config.threads,
                 guarded(kIdentitySmoothingZero,
                         [&](std::size_t i) {
                           return run_smoothing_zero_case(case_seed(s, "smz", i), i, tol);
                         }),
                 out);
  parallel_cases(config.cases_sandwich, config.threads,
                 guarded(kIdentitySandwich,
                         [&](std::size_t i) {
                           return run_sandwich_case(case_seed(s, "sand", i), i, tol);
                         }),
                 out);
  parallel_cases(config.cases_arak, config.threads,
                 guarded(kIdentityArakSpectral,
                         [&](std::size_t i) {
                           return run_arak_case(case_seed(s, "arak", i), i);
                         }),
                 out);
  parallel_cases(config.cases_inverse_shape, config.threads,
                 guarded(kIdentityInverseShape,
                         [&](std::size_t i) {
                           return run_inverse_shape_case(case_seed(s, "invs", i), i);
                         }),
                 out);
  parallel_cases(config.cases_cube_shape, config.threads,
                 guarded(kIdentityCubeShape,
                         [&](std::size_t i) {
                           return run_cube_shape_case(case_seed(s, "cube", i), i);
                         }),
                 out);
  return out;
}

CalibrationTable calibrate(const std::vector<SuiteRecord>& records,
                           const std::vector<std::string>& require) {
  std::map<std::string, std::vector<double>> ratios;
  for (const auto& r : records) {
    if (r.ratio) ratios[r.identity].push_back(*r.ratio);
  }
  for (const auto& id : require) {
    auto it = ratios.find(id);
    if (it == ratios.end() || it->second.empty())
      throw std::invalid_argument("calibrate: identity class '" + id + "' is empty");
  }
  CalibrationTable table;
  for (auto& [id, xs] : ratios) {
    std::sort(xs.begin(), xs.end());
    IdentityStats st;
    st.count = xs.size();
    st.min = xs.front();
    st.max = xs.back();
    auto quantile = [&](double q) {
      double pos = q * static_cast<double>(xs.size() - 1);
      std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      std::size_t hi = std::min(lo + 1, xs.size() - 1);
      double frac = pos - std::floor(pos);
      return xs[lo] * (1.0 - frac) + xs[hi] * frac;
    };
    st.median = quantile(0.5);
    st.q10 = quantile(0.1);
    st.q90 = quantile(0.9);
    table[id] = st;
  }
  return table;
}

std::pair<double, double> verify_sandwich_band(const std::vector<HSuiteMember>& suite,
                                               double tol) {
  if (suite.empty()) throw std::invalid_argument("verify_sandwich_band: empty suite");
  double lo = kInfinity, hi = 0.0;
  for (const auto& member : suite) {
    DiscreteDistribution law = lattice_law(member.spec, tol);
    double q = concentration(law, member.tau).upper;
    EsseenEstimate e = esseen_integral(member.spec, member.tau, QuadratureLimits{tol, 1u << 18});
    if (!(e.value > 0.0))
      throw std::runtime_error("verify_sandwich_band: vanishing Esseen value");
    double ratio = q / e.value;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  if (!(lo > 0.0)) throw std::runtime_error("verify_sandwich_band: band is not positive");
  return {lo, hi};
}

std::vector<std::string> check_drift(const CalibrationTable& observed,
                                     const CalibrationTable& baseline, double drift_tol) {
  std::vector<std::string> violations;
  for (const auto& [id, base] : baseline) {
    auto it = observed.find(id);
    if (it == observed.end()) {
      violations.push_back(id + ": missing from run");
      continue;
    }
    if (it->second.max > base.max * (1.0 + drift_tol))
      violations.push_back(id + ": max ratio drifted above baseline");
    if (base.min > 0.0 && it->second.min < base.min * (1.0 - drift_tol))
      violations.push_back(id + ": min ratio drifted below baseline");
  }
  return violations;
}

std::string suite_csv(const std::vector<SuiteRecord>& records) {
  std::string out = "case_id,identity,lhs,rhs,ratio,pass\n";
  for (const auto& r : records) {
    out += r.case_id;
    out += ',';
    out += r.identity;
    out += ',';
    out += fmt17(r.lhs);
    out += ',';
    out += fmt17(r.rhs);
    out += ',';
    if (r.ratio) out += fmt17(*r.ratio);
    out += ',';
    if (r.pass) out += (*r.pass ? "true" : "false");
    out += '\n';
  }
  return out;
}

}  // namespace conclab
