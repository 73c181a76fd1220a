#include "conclab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace conclab {

namespace {

double coverage_slack(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return kMergeRelTol * (1.0 + m);
}

// mass of W covered by {offset + j*step : |j| <= half_width} at tolerance tau
struct ApCoverage {
  double covered_mass = 0.0;
  long long max_j = 0;
  std::size_t covered_count = 0;
};

ApCoverage ap_coverage(std::span<const double> pts, std::span<const double> wts,
                       double step, double offset, long long half_width, double tau,
                       double slack) {
  ApCoverage out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double resid;
    long long j = 0;
    if (step == 0.0) {
      resid = std::fabs(pts[i] - offset);
    } else {
      double q = (pts[i] - offset) / step;
      j = std::llround(q);
      if (j > half_width) j = half_width;
      if (j < -half_width) j = -half_width;
      resid = std::fabs(pts[i] - offset - static_cast<double>(j) * step);
    }
    if (resid <= tau + slack) {
      out.covered_mass += wts[i];
      ++out.covered_count;
      out.max_j = std::max(out.max_j, std::llabs(j));
    }
  }
  return out;
}

std::vector<long long> divisors_of(long long v) {
  std::vector<long long> out;
  for (long long d = 1; d * d <= v; ++d) {
    if (v % d == 0) {
      out.push_back(d);
      if (d != v / d) out.push_back(v / d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CGAP lift_rank(const CGAP& k, int r) {
  CGAP out = k;
  auto& b = out.blocks.front();
  std::vector<double> radii = b.body.radii();
  while (static_cast<int>(b.h.size()) < r) {
    b.h.push_back(0.0);
    radii.push_back(0.49);
  }
  b.body = ConvexBody::box(radii);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// beta
// ---------------------------------------------------------------------------

BetaResult beta_exact_rank1(const SpectralMeasure& w, long long m, double tau,
                            std::int64_t max_den) {
  if (w.dim() != 1) throw std::invalid_argument("beta_exact_rank1: one-dimensional only");
  if (m < 1) throw std::invalid_argument("beta_exact_rank1: m >= 1 required");
  if (!(tau >= 0.0)) throw std::invalid_argument("beta_exact_rank1: tau >= 0 required");
  if (w.size() > 64)
    throw cap_exceeded("beta_exact_rank1: support larger than desk scale (64)");

  std::vector<Rational> pts(w.size());
  std::vector<Rational> wts(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto p = Rational::from_double(w.point(i)[0], max_den);
    auto q = Rational::from_double(w.weight(i), max_den);
    if (!p || !q)
      throw cap_exceeded("beta_exact_rank1: support not rational under denominator cap");
    pts[i] = *p;
    wts[i] = *q;
  }
  auto tau_r = Rational::from_double(tau, max_den);
  if (!tau_r) throw cap_exceeded("beta_exact_rank1: tau not rational under denominator cap");

  // rescale points to a common integer grid
  std::int64_t lcm = 1;
  for (const auto& p : pts) {
    std::int64_t g = std::gcd(lcm, p.den());
    double test = static_cast<double>(lcm / g) * static_cast<double>(p.den());
    if (test > 1e12) throw cap_exceeded("beta_exact_rank1: denominator cap exceeded");
    lcm = lcm / g * p.den();
  }
  std::vector<long long> ints(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    ints[i] = pts[i].num() * (lcm / pts[i].den());

  std::set<Rational> steps;
  for (std::size_t i = 0; i < ints.size(); ++i) {
    for (std::size_t k = i + 1; k < ints.size(); ++k) {
      long long diff = std::llabs(ints[i] - ints[k]);
      if (diff == 0) continue;
      if (diff > 4'000'000'000LL)
        throw cap_exceeded("beta_exact_rank1: support span exceeds divisor-scan cap");
      for (long long dv : divisors_of(diff)) steps.insert(Rational(dv, lcm));
    }
  }

  Rational total(0);
  for (const auto& x : wts) total += x;
  const long long half_max = (m - 1) / 2;

  Rational best_covered(-1);
  double best_step = 0.0;
  double best_offset = 0.0;
  long long best_half = 0;

  auto consider = [&](const Rational& step, const Rational& offset) {
    Rational covered(0);
    long long used = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Rational resid;
      long long j = 0;
      if (step.is_zero()) {
        resid = (pts[i] - offset).abs();
      } else {
        Rational q = (pts[i] - offset) / step;
        j = q.round_nearest();
        if (j > half_max) j = half_max;
        if (j < -half_max) j = -half_max;
        resid = (pts[i] - offset - step * Rational(j)).abs();
      }
      if (resid <= *tau_r) {
        covered += wts[i];
        used = std::max(used, std::llabs(j));
      }
    }
    if (covered > best_covered) {
      best_covered = covered;
      best_step = step.to_double();
      best_offset = offset.to_double();
      best_half = used;
    }
  };

  for (const auto& p : pts) consider(Rational(0), p);
  for (const auto& s : steps) {
    for (const auto& p : pts) consider(s, p);
  }

  BetaResult r;
  r.upper = (total - best_covered).to_double();
  r.witness = CGAP::rank1(best_step, best_offset, best_half);
  r.exact = true;
  r.r = 1;
  r.m = m;
  r.tau = tau;
  return r;
}

BetaResult beta_upper(const SpectralMeasure& w, int r, long long m, double tau,
                      std::size_t budget, std::uint64_t seed) {
  if (w.dim() != 1) throw std::invalid_argument("beta_upper: one-dimensional only");
  if (r < 1 || r > 3) throw std::invalid_argument("beta_upper: r in {1,2,3}");
  if (m < 1) throw std::invalid_argument("beta_upper: m >= 1 required");
  if (!(tau >= 0.0)) throw std::invalid_argument("beta_upper: tau >= 0 required");

  const std::size_t n = w.size();
  std::vector<double> pts(n);
  std::vector<double> wts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = w.point(i)[0];
    wts[i] = w.weight(i);
  }
  const double total = w.total_mass();
  const double slack = coverage_slack(pts);
  const long long half_max = (m - 1) / 2;

  double best_covered = -1.0;
  double best_step = 0.0, best_offset = 0.0;
  long long best_half = 0;
  std::size_t evals = 0;

  auto consider = [&](double step, double offset) {
    auto cov = ap_coverage(pts, wts, step, offset, half_max, tau, slack);
    ++evals;
    if (cov.covered_mass > best_covered + 1e-15 * (1.0 + total)) {
      best_covered = cov.covered_mass;
      best_step = step;
      best_offset = offset;
      best_half = cov.max_j;
    }
  };

  consider(0.0, 0.0);  // trivial witness {0}
  for (double p : pts) consider(0.0, p);

  // candidate steps from pairwise differences; sampled when the pair count
  // leaves the budget
  std::vector<double> steps;
  if (n * n <= budget) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        double d = std::fabs(pts[i] - pts[k]);
        if (d > slack) steps.push_back(d);
      }
    }
  } else {
    std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc908ULL);
    for (std::size_t it = 0; it < budget; ++it) {
      std::size_t i = static_cast<std::size_t>(rng() % n);
      std::size_t k = static_cast<std::size_t>(rng() % n);
      double d = std::fabs(pts[i] - pts[k]);
      if (d > slack) steps.push_back(d);
    }
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  for (double s : steps) {
    if (evals >= budget) break;
    for (double o : pts) {
      consider(s, o);
      if (evals >= budget) break;
    }
    consider(s, 0.0);
  }

  BetaResult out;
  out.r = r;
  out.m = m;
  out.tau = tau;
  out.exact = false;

  if (r == 1 || best_covered >= total) {
    out.upper = std::max(total - best_covered, 0.0);
    out.witness = lift_rank(CGAP::rank1(best_step, best_offset, best_half), r);
    return out;
  }

  // r >= 2: greedy second (and third) generator over residual support with a
  // volume split; evaluated through full point enumeration
  double best_multi = best_covered;
  std::vector<double> multi_h{best_step};
  std::vector<long long> multi_half{best_half};
  double multi_offset = best_offset;

  auto eval_multi = [&](const std::vector<double>& hs, const std::vector<long long>& halves,
                        double offset) -> double {
    CGAP k;
    std::vector<double> radii;
    for (long long hw : halves) radii.push_back(static_cast<double>(hw) + 0.5);
    k.blocks.push_back(CgapBlock{hs, ConvexBody::box(radii), offset});
    PointSet ps = points_of(k);
    double covered = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double x[1] = {pts[i]};
      if (neighborhood_distance(std::span<const double>(x, 1), ps) <= tau + slack)
        covered += wts[i];
    }
    return covered;
  };

  long long h1_cap = std::max<long long>((m / 3 - 1) / 2, 0);
  auto cov1 = ap_coverage(pts, wts, best_step, best_offset, h1_cap, tau, slack);
  std::vector<double> resid_pts;
  std::vector<double> resid_wts;
  for (std::size_t i = 0; i < n; ++i) {
    double resid;
    if (best_step == 0.0) {
      resid = std::fabs(pts[i] - best_offset);
    } else {
      double q = (pts[i] - best_offset) / best_step;
      long long j = std::clamp<long long>(std::llround(q), -h1_cap, h1_cap);
      resid = std::fabs(pts[i] - best_offset - static_cast<double>(j) * best_step);
    }
    if (resid > tau + slack) {
      resid_pts.push_back(pts[i]);
      resid_wts.push_back(wts[i]);
    }
  }
  if (!resid_pts.empty() && h1_cap >= 0) {
    std::vector<double> steps2;
    for (std::size_t i = 0; i < resid_pts.size(); ++i) {
      for (std::size_t k = i + 1; k < resid_pts.size(); ++k) {
        double d = std::fabs(resid_pts[i] - resid_pts[k]);
        if (d > slack) steps2.push_back(d);
      }
      steps2.push_back(std::fabs(resid_pts[i] - best_offset));
    }
    std::sort(steps2.begin(), steps2.end());
    steps2.erase(std::unique(steps2.begin(), steps2.end()), steps2.end());
    long long m2 = m / std::max<long long>(2 * h1_cap + 1, 1);
    long long h2_cap = std::max<long long>((m2 - 1) / 2, 0);
    for (double s2 : steps2) {
      if (evals >= budget) break;
      ++evals;
      double c = eval_multi({best_step == 0.0 ? 1.0 : best_step, s2}, {h1_cap, h2_cap},
                            best_offset);
      if (c > best_multi + 1e-15 * (1.0 + total)) {
        best_multi = c;
        multi_h = {best_step == 0.0 ? 1.0 : best_step, s2};
        multi_half = {h1_cap, h2_cap};
        multi_offset = best_offset;
      }
    }
  }

  CGAP witness;
  if (multi_h.size() == 1) {
    witness = lift_rank(CGAP::rank1(best_step, best_offset, best_half), r);
    out.upper = std::max(total - best_covered, 0.0);
  } else {
    std::vector<double> radii;
    for (long long hw : multi_half) radii.push_back(static_cast<double>(hw) + 0.5);
    witness.blocks.push_back(CgapBlock{multi_h, ConvexBody::box(radii), multi_offset});
    witness = lift_rank(witness, r);
    out.upper = std::max(total - best_multi, 0.0);
  }
  out.witness = witness;
  return out;
}

double arak_bound_rhs(double alpha_beta, int r, long long m, double c) {
  if (r < 1) throw std::invalid_argument("arak_bound_rhs: r >= 1 required");
  if (m < 1) throw std::invalid_argument("arak_bound_rhs: m >= 1 required");
  if (!(c > 0.0)) throw std::invalid_argument("arak_bound_rhs: c > 0 required");
  if (!(alpha_beta >= 0.0)) throw std::invalid_argument("arak_bound_rhs: alpha*beta >= 0");
  if (alpha_beta == 0.0) return kInfinity;
  double first = 1.0 / (static_cast<double>(m) * std::sqrt(alpha_beta));
  double second = std::pow(static_cast<double>(r + 1), 2.5 * static_cast<double>(r)) /
                  std::pow(alpha_beta, 0.5 * static_cast<double>(r + 1));
  return std::pow(c, static_cast<double>(r + 1)) * (first + second);
}

double arak_bound_rhs_floored(double alpha_beta, int r, long long m, double c,
                              double kappa, double delta) {
  if (!(kappa > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("arak_bound_rhs_floored: kappa, delta > 0");
  double factor = 1.0 + static_cast<double>(strict_floor(kappa / delta));
  return factor * arak_bound_rhs(alpha_beta, r, m, c);
}

// ---------------------------------------------------------------------------
// fit_progression_1d
// ---------------------------------------------------------------------------

namespace {

struct FitBest {
  std::size_t outliers = SIZE_MAX;
  long long volume = 0;
  double abs_step = 0.0;
  double step = 0.0;
  double offset = 0.0;
  long long half = 0;

  bool better_than(std::size_t o, long long v, double s) const {
    if (o != outliers) return o < outliers;
    if (v != volume) return v < volume;
    return s < abs_step - 1e-15 * (1.0 + abs_step);
  }
};

}  // namespace

Fit1D fit_progression_1d(std::span<const double> values, double tau, long long m_cap,
                         std::size_t outlier_budget) {
  if (values.empty()) throw std::invalid_argument("fit_progression_1d: empty values");
  if (!(tau >= 0.0)) throw std::invalid_argument("fit_progression_1d: tau >= 0");
  if (m_cap < 1) throw std::invalid_argument("fit_progression_1d: m_cap >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_progression_1d: non-finite value");
  }
  const std::size_t n = values.size();
  const double slack = coverage_slack(values);
  const long long half_max = (m_cap - 1) / 2;

  FitBest best;
  auto consider = [&](double step, double offset) {
    std::size_t covered = 0;
    long long used = 0;
    for (double x : values) {
      double resid;
      long long j = 0;
      if (step == 0.0) {
        resid = std::fabs(x - offset);
      } else {
        double q = (x - offset) / step;
        j = std::clamp<long long>(std::llround(q), -half_max, half_max);
        resid = std::fabs(x - offset - static_cast<double>(j) * step);
      }
      if (resid <= tau + slack) {
        ++covered;
        used = std::max(used, std::llabs(j));
      }
    }
    std::size_t out = n - covered;
    long long vol = 2 * used + 1;
    if (best.better_than(out, vol, std::fabs(step))) {
      best.outliers = out;
      best.volume = vol;
      best.abs_step = std::fabs(step);
      best.step = step;
      best.offset = offset;
      best.half = used;
    }
  };

  for (double o : values) consider(0.0, o);

  // phase 1: raw pairwise differences
  std::vector<double> steps;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      double d = std::fabs(values[i] - values[k]);
      if (d > slack) steps.push_back(d);
    }
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  for (double s : steps) {
    for (double o : values) consider(s, o);
  }

  // phase 2 (escalation): divisor steps on the rational path, quantized
  // quotients otherwise; skipped once the budget is already met
  if (best.outliers > outlier_budget) {
    std::vector<double> extra;
    std::vector<Rational> rats(n);
    bool rational = true;
    for (std::size_t i = 0; i < n && rational; ++i) {
      auto r = Rational::from_double(values[i], 1'000'000);
      if (!r)
        rational = false;
      else
        rats[i] = *r;
    }
    std::int64_t lcm = 1;
    if (rational) {
      for (const auto& r : rats) {
        std::int64_t g = std::gcd(lcm, r.den());
        double test = static_cast<double>(lcm / g) * static_cast<double>(r.den());
        if (test > 1e9) {
          rational = false;
          break;
        }
        lcm = lcm / g * r.den();
      }
    }
    if (rational) {
      std::set<long long> divs;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
          long long a = rats[i].num() * (lcm / rats[i].den());
          long long b = rats[k].num() * (lcm / rats[k].den());
          long long diff = std::llabs(a - b);
          if (diff == 0 || diff > 4'000'000'000LL) continue;
          for (long long dv : divisors_of(diff)) divs.insert(dv);
        }
      }
      for (long long dv : divs)
        extra.push_back(static_cast<double>(dv) / static_cast<double>(lcm));
    } else if (tau > 0.0) {
      const double grid = tau / 4.0;
      std::set<double> qset;
      for (double d : steps) {
        for (int k = 2; k <= 16; ++k) {
          double q = std::round(d / static_cast<double>(k) / grid) * grid;
          if (q > slack) qset.insert(q);
        }
      }
      extra.assign(qset.begin(), qset.end());
    }
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    for (double s : extra) {
      for (double o : values) consider(s, o);
    }
  }

  Fit1D out;
  out.step = best.step;
  out.offset = best.offset;
  out.volume = best.volume;
  out.progression = CGAP::rank1(best.step, best.offset, best.half);
  for (std::size_t i = 0; i < n; ++i) {
    double x = values[i];
    double resid;
    if (best.step == 0.0) {
      resid = std::fabs(x - best.offset);
    } else {
      double q = (x - best.offset) / best.step;
      long long j = std::clamp<long long>(std::llround(q), -half_max, half_max);
      resid = std::fabs(x - best.offset - static_cast<double>(j) * best.step);
    }
    if (!(resid <= tau + slack)) out.outliers.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// inverse_detect
// ---------------------------------------------------------------------------

namespace {

DiscreteDistribution coordinate_sum_law(const CoefficientVector& a,
                                        const DiscreteDistribution& x, int j,
                                        std::size_t cap) {
  auto slice = a.coordinate_slice(j);
  bool all_zero = true;
  for (double v : slice) all_zero = all_zero && v == 0.0;
  if (all_zero) return point_mass({0.0});
  return exact_sum_distribution(CoefficientVector(std::move(slice), 1), x, cap);
}

double clamp_finite(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

}  // namespace

StructureReport inverse_detect(const CoefficientVector& a, const DiscreteDistribution& x,
                               double tau, double rho, std::size_t n_prime,
                               const DetectConfig& config) {
  if (!(tau >= 0.0)) throw std::invalid_argument("inverse_detect: tau >= 0");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("inverse_detect: rho in (0,1]");
  const int d = a.dim();
  const std::size_t n = a.size();

  DiscreteDistribution g = symmetrize(x);
  const double p1 = tail_mass(g, 1.0);
  const double tol = tau * rho;
  const double rho_eff = (tau == 0.0) ? 1.0 : rho;  // 0/0 = 1

  StructureReport rep;
  std::vector<CGAP> parts;
  long long volume = 1;
  for (int j = 0; j < d; ++j) {
    DiscreteDistribution fj = coordinate_sum_law(a, x, j, config.support_cap);
    double qj = concentration(fj, tau).upper;
    rep.coordinate_q.push_back(qj);

    long long m_j = config.m_cap_default;
    if (n_prime > 0 && p1 > 0.0 && qj > 0.0) {
      double y = 4.0 * config.calibration_c * config.calibration_c /
                 (rho_eff * qj * std::sqrt(p1 * static_cast<double>(n_prime) / 4.0));
      if (std::isfinite(y)) {
        m_j = std::clamp<long long>(strict_floor(y) + 1, 1, config.m_cap_max);
      }
    }
    std::size_t budget = config.outlier_budget > 0 ? config.outlier_budget : n_prime;
    Fit1D fit = fit_progression_1d(a.coordinate_slice(j), tol, m_j, budget);
    rep.coordinate_rank.push_back(1);
    rep.coordinate_volume.push_back(fit.volume);
    volume *= fit.volume;
    parts.push_back(fit.progression);
  }

  CGAP k = product(parts);
  PointSet ps = points_of(k);
  CoverCount cc = cover_count(a, ps, tol);

  rep.progression = k;
  rep.rank = k.rank();
  rep.volume = volume;
  rep.covered = cc.covered;
  rep.outliers = cc.outliers;
  rep.residual_mass = static_cast<double>(cc.outliers.size());
  rep.degenerate = (p1 == 0.0);

  // cardinality target: |K| within the product of per-coordinate caps
  double rhs_card = 1.0;
  for (int j = 0; j < d; ++j) {
    double term =
        n_prime == 0
            ? kInfinity
            : config.calibration_c /
                  (rep.coordinate_q[j] * rho_eff * std::sqrt(static_cast<double>(n_prime)));
    rhs_card *= std::max(term, 1.0);
  }
  BoundTarget card;
  card.name = "cardinality";
  card.lhs = static_cast<double>(ps.size());
  card.rhs = clamp_finite(rhs_card);
  card.satisfied = card.lhs <= card.rhs;
  rep.bound_targets.push_back(card);

  BoundTarget cover;
  cover.name = "coverage";
  cover.lhs = static_cast<double>(n - cc.covered);
  cover.rhs = static_cast<double>(d) * static_cast<double>(n_prime);
  cover.satisfied = cover.lhs <= cover.rhs;
  rep.bound_targets.push_back(cover);

  return rep;
}

// ---------------------------------------------------------------------------
// k1_structure_report
// ---------------------------------------------------------------------------

namespace {

double dist_sorted(double x, const std::vector<double>& sorted) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  double best = kInfinity;
  if (it != sorted.end()) best = std::min(best, std::fabs(*it - x));
  if (it != sorted.begin()) best = std::min(best, std::fabs(*(it - 1) - x));
  return best;
}

struct GreedyCube {
  std::vector<double> u;
  std::vector<double> points;  // sorted signed-cube values
  double residual_mass = 0.0;
};

// grow u one element at a time, always taking the candidate (residual points
// and their halves) that newly covers the most measure within delta
GreedyCube greedy_signed_cube(const SpectralMeasure& m1, double delta, int rank_cap,
                              double residual_target, std::size_t point_cap) {
  GreedyCube out;
  out.points = {0.0};
  const double slack = coverage_slack(m1.points());
  std::vector<double> pts(m1.size());
  std::vector<double> wts(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    pts[i] = m1.point(i)[0];
    wts[i] = m1.weight(i);
  }
  while (true) {
    std::vector<std::size_t> resid;
    double resid_mass = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (dist_sorted(pts[i], out.points) > delta + slack) {
        resid.push_back(i);
        resid_mass += wts[i];
      }
    }
    out.residual_mass = resid_mass;
    if (resid_mass <= residual_target + 1e-15) break;
    if (static_cast<int>(out.u.size()) >= rank_cap) break;
    if (out.points.size() * 3 > point_cap) break;

    std::set<double> cand_set;
    for (std::size_t i : resid) {
      if (std::fabs(pts[i]) > slack) {
        cand_set.insert(pts[i]);
        cand_set.insert(pts[i] / 2.0);
      }
    }
    if (cand_set.empty()) break;
    double best_gain = -1.0;
    double best_cand = 0.0;
    for (double c : cand_set) {
      double gain = 0.0;
      for (std::size_t i : resid) {
        if (dist_sorted(pts[i] - c, out.points) <= delta + slack ||
            dist_sorted(pts[i] + c, out.points) <= delta + slack)
          gain += wts[i];
      }
      if (gain > best_gain + 1e-15 ||
          (std::fabs(gain - best_gain) <= 1e-15 && std::fabs(c) < std::fabs(best_cand))) {
        best_gain = gain;
        best_cand = c;
      }
    }
    out.u.push_back(best_cand);
    std::vector<double> np;
    np.reserve(out.points.size() * 3);
    for (double y : out.points) {
      np.push_back(y - best_cand);
      np.push_back(y);
      np.push_back(y + best_cand);
    }
    std::sort(np.begin(), np.end());
    np.erase(std::unique(np.begin(), np.end(),
                         [&](double a, double b) { return std::fabs(a - b) <= slack; }),
             np.end());
    out.points = std::move(np);
  }
  return out;
}

long long pow3(int r) {
  long long v = 1;
  for (int i = 0; i < r; ++i) {
    if (v > kVolumeCap / 3) return kVolumeCap;
    v *= 3;
  }
  return v;
}

StructureReport k1_core(const std::vector<SpectralMeasure>& coord_measures,
                        const SpectralMeasure& full_measure,
                        const std::vector<double>& gamma, std::span<const double> tau,
                        std::span<const double> delta, double factor,
                        const CoefficientVector* coeffs, const K1Config& config) {
  const int d = static_cast<int>(coord_measures.size());
  if (static_cast<int>(tau.size()) != d || static_cast<int>(delta.size()) != d)
    throw std::invalid_argument("k1_structure_report: tau/delta must have one entry per coordinate");
  for (int j = 0; j < d; ++j) {
    if (!(tau[j] >= delta[j]) || !(delta[j] >= 0.0))
      throw std::invalid_argument("k1_structure_report: need tau_j >= delta_j >= 0");
  }

  StructureReport rep;
  rep.degenerate = (factor == 0.0);
  std::vector<SignedCube> cubes;
  std::vector<std::vector<double>> cube_points(d);
  double log_sum = 0.0;
  double log_cube_sum = 0.0;
  int total_rank = 0;
  for (int j = 0; j < d; ++j) {
    double log_ratio;
    if (tau[j] == 0.0 && delta[j] == 0.0) {
      log_ratio = 0.0;  // 0/0 = 1
    } else if (delta[j] == 0.0) {
      log_ratio = kInfinity;
    } else {
      log_ratio = std::log(tau[j] / delta[j]);
    }
    double term = std::fabs(std::log(gamma[j])) + log_ratio + 1.0;
    int cap = config.rank_cap_abs;
    if (std::isfinite(term))
      cap = std::min<int>(cap, static_cast<int>(std::ceil(config.rank_cap_c * term)));
    cap = std::max(cap, 1);
    GreedyCube gc = greedy_signed_cube(coord_measures[j], delta[j], cap,
                                       config.residual_target, 2'000'000);
    int rj = std::max<int>(1, static_cast<int>(gc.u.size()));
    if (gc.u.empty()) gc.u.push_back(0.0);
    SignedCube cube;
    for (double u : gc.u) cube.u.push_back({u});
    cubes.push_back(cube);
    cube_points[j] = gc.points;
    rep.coordinate_q.push_back(gamma[j]);
    rep.coordinate_rank.push_back(rj);
    rep.coordinate_volume.push_back(pow3(rj));
    total_rank += rj;
    log_sum += std::isfinite(term) ? term : static_cast<double>(config.rank_cap_abs);
    double t3 = std::isfinite(term) ? term : static_cast<double>(config.rank_cap_abs);
    log_cube_sum += t3 * t3 * t3;
  }

  SignedCube assembled = product(cubes);
  rep.progression = assembled;
  rep.rank = total_rank;
  rep.volume = pow3(total_rank);  // saturates at the volume cap

  const auto covered_point = [&](std::span<const double> y) {
    for (int j = 0; j < d; ++j) {
      double slack = coverage_slack(cube_points[j]);
      if (dist_sorted(y[j], cube_points[j]) > delta[j] + slack) return false;
    }
    return true;
  };

  double outside = 0.0;
  for (std::size_t i = 0; i < full_measure.size(); ++i) {
    if (!covered_point(full_measure.point(i))) outside += full_measure.weight(i);
  }
  rep.residual_mass = factor * outside;

  if (coeffs != nullptr) {
    for (std::size_t kk = 0; kk < coeffs->size(); ++kk) {
      if (covered_point(coeffs->entry(kk)))
        ++rep.covered;
      else
        rep.outliers.push_back(kk);
    }
  } else {
    for (std::size_t i = 0; i < full_measure.size(); ++i) {
      if (covered_point(full_measure.point(i)))
        ++rep.covered;
      else
        rep.outliers.push_back(i);
    }
  }

  BoundTarget rank_t;
  rank_t.name = "rank-sum";
  rank_t.lhs = static_cast<double>(total_rank);
  rank_t.rhs = clamp_finite(config.calibration_c * log_sum);
  rank_t.satisfied = rank_t.lhs <= rank_t.rhs;
  rep.bound_targets.push_back(rank_t);

  BoundTarget res_t;
  res_t.name = "residual-mass";
  res_t.lhs = rep.residual_mass;
  res_t.rhs = clamp_finite(config.calibration_c * log_cube_sum);
  res_t.satisfied = res_t.lhs <= res_t.rhs;
  rep.bound_targets.push_back(res_t);

  if (config.thm_a && config.thm_b && coeffs != nullptr) {
    double n = static_cast<double>(coeffs->size());
    double poly = (*config.thm_a + *config.thm_b) * std::log(std::max(n, 2.0)) + 1.0;
    BoundTarget rp;
    rp.name = "rank-polylog";
    rp.lhs = static_cast<double>(total_rank);
    rp.rhs = clamp_finite(config.calibration_c * d * poly);
    rp.satisfied = rp.lhs <= rp.rhs;
    rep.bound_targets.push_back(rp);
    BoundTarget sp;
    sp.name = "residual-polylog";
    sp.lhs = rep.residual_mass;
    sp.rhs = clamp_finite(config.calibration_c * d * poly * poly * poly);
    sp.satisfied = sp.lhs <= sp.rhs;
    rep.bound_targets.push_back(sp);
  }

  return rep;
}

}  // namespace

StructureReport k1_structure_report(const CoefficientVector& a,
                                    const DiscreteDistribution& x,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config) {
  const int d = a.dim();
  SpectralTriple triple = spectral_measures(a, 1.0);
  std::vector<SpectralMeasure> coords;
  std::vector<double> gamma;
  for (int j = 0; j < d; ++j) {
    coords.push_back(coordinate_projection(triple.two_sided, j));
    DiscreteDistribution fj = coordinate_sum_law(a, x, j, config.support_cap);
    gamma.push_back(concentration(fj, tau[j]).upper);
  }
  DiscreteDistribution g = symmetrize(x);
  bool all_zero = true;
  for (double t : tau) all_zero = all_zero && t == 0.0;
  double factor = tail_mass(g, all_zero ? 0.0 : 1.0);
  return k1_core(coords, triple.two_sided, gamma, tau, delta, factor, &a, config);
}

StructureReport k1_structure_report(const CompoundPoissonSpec& spec,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config) {
  const int d = spec.dim();
  std::vector<SpectralMeasure> coords;
  std::vector<double> gamma;
  for (int j = 0; j < d; ++j) {
    SpectralMeasure mj = coordinate_projection(spec.levy(), j);
    coords.push_back(mj);
    DiscreteDistribution dj =
        compound_poisson_exact(CompoundPoissonSpec(mj), 1e-12, config.support_cap);
    gamma.push_back(concentration(dj, tau[j]).upper);
  }
  return k1_core(coords, spec.levy(), gamma, tau, delta, 1.0, nullptr, config);
}

StructureReport k1_structure_report(const DiscreteDistribution& f, int n_power,
                                    std::span<const double> tau,
                                    std::span<const double> delta,
                                    const K1Config& config) {
  if (n_power < 1) throw std::invalid_argument("k1_structure_report: n_power >= 1");
  const int d = f.dim();
  std::vector<SpectralMeasure> coords;
  std::vector<double> gamma;
  for (int j = 0; j < d; ++j) {
    DiscreteDistribution fj = coordinate_projection(f, j);
    coords.emplace_back(1, fj.points(), fj.masses());
    CoefficientVector ones(std::vector<double>(static_cast<std::size_t>(n_power), 1.0), 1);
    DiscreteDistribution powed = exact_sum_distribution(ones, fj, config.support_cap);
    gamma.push_back(concentration(powed, tau[j]).upper);
  }
  SpectralMeasure full(f.dim(), f.points(), f.masses());
  return k1_core(coords, full, gamma, tau, delta, static_cast<double>(n_power), nullptr,
                 config);
}

}  // namespace conclab
