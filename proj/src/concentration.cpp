#include "conclab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace conclab {

long long strict_floor(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("strict_floor: non-finite input");
  double f = std::floor(x);
  if (f == x) f -= 1.0;
  if (f > 9.0e18 || f < -9.0e18) throw std::overflow_error("strict_floor: out of range");
  return static_cast<long long>(f);
}

std::int64_t strict_floor(const Rational& x) { return x.floor_strict(); }

namespace {

long long checked_int_pow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<long long>::max() / std::max<long long>(base, 1))
      throw std::overflow_error("regularity_factor: overflow");
    r *= base;
  }
  return r;
}

}  // namespace

long long regularity_factor(double mu, double lambda, int d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("regularity_factor: lambda > 0 required");
  if (!(mu >= 0.0)) throw std::invalid_argument("regularity_factor: mu >= 0 required");
  if (d < 1) throw std::invalid_argument("regularity_factor: d >= 1 required");
  long long base = 1 + strict_floor(mu / lambda);
  return checked_int_pow(base, d);
}

long long regularity_factor(const Rational& mu, const Rational& lambda, int d) {
  if (!(lambda > Rational(0)))
    throw std::invalid_argument("regularity_factor: lambda > 0 required");
  if (mu < Rational(0)) throw std::invalid_argument("regularity_factor: mu >= 0 required");
  if (d < 1) throw std::invalid_argument("regularity_factor: d >= 1 required");
  long long base = 1 + (mu / lambda).floor_strict();
  return checked_int_pow(base, d);
}

std::string to_string(ConcentrationMethod m) {
  switch (m) {
    case ConcentrationMethod::exact_window: return "exact-window";
    case ConcentrationMethod::bracket_candidates: return "bracket-candidates";
    case ConcentrationMethod::quadrature: return "quadrature";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// exact_sum_distribution
// ---------------------------------------------------------------------------

DiscreteDistribution exact_sum_distribution(const CoefficientVector& a,
                                            const DiscreteDistribution& x,
                                            std::size_t support_cap) {
  if (x.dim() != 1)
    throw std::invalid_argument("exact_sum_distribution: X must be one-dimensional");
  const int d = a.dim();
  const auto dd = static_cast<std::size_t>(d);

  // process coefficients smallest-magnitude first; repeated small entries
  // collide early and keep the intermediate support small
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t k) {
    return max_norm(a.entry(i)) < max_norm(a.entry(k));
  });

  std::vector<double> pts(dd, 0.0);
  std::vector<double> ms{1.0};
  for (std::size_t step : order) {
    auto coeff = a.entry(step);
    std::size_t next = ms.size() * x.size();
    if (next > support_cap)
      throw cap_exceeded("exact_sum_distribution: support cap exceeded");
    std::vector<double> npts;
    std::vector<double> nms;
    npts.reserve(next * dd);
    nms.reserve(next);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      for (std::size_t s = 0; s < x.size(); ++s) {
        double xv = x.point(s)[0];
        for (std::size_t j = 0; j < dd; ++j)
          npts.push_back(pts[i * dd + j] + xv * coeff[j]);
        nms.push_back(ms[i] * x.mass(s));
      }
    }
    DiscreteDistribution merged(d, std::move(npts), std::move(nms));
    pts = merged.points();
    ms = merged.masses();
  }
  return DiscreteDistribution(d, std::move(pts), std::move(ms));
}

RationalDistribution exact_sum_distribution(const RationalCoefficients& a,
                                            const RationalDistribution& x,
                                            std::size_t support_cap) {
  if (x.dim() != 1)
    throw std::invalid_argument("exact_sum_distribution: X must be one-dimensional");
  const int d = a.dim();
  const auto dd = static_cast<std::size_t>(d);

  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t k) {
    Rational mi(0), mk(0);
    for (const auto& v : a.entry(i)) mi = std::max(mi, v.abs());
    for (const auto& v : a.entry(k)) mk = std::max(mk, v.abs());
    return mi < mk;
  });

  std::vector<Rational> pts(dd, Rational(0));
  std::vector<Rational> ms{Rational(1)};
  for (std::size_t step : order) {
    auto coeff = a.entry(step);
    std::size_t next = ms.size() * x.size();
    if (next > support_cap)
      throw cap_exceeded("exact_sum_distribution: support cap exceeded");
    std::vector<Rational> npts;
    std::vector<Rational> nms;
    npts.reserve(next * dd);
    nms.reserve(next);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      for (std::size_t s = 0; s < x.size(); ++s) {
        const Rational& xv = x.point(s)[0];
        for (std::size_t j = 0; j < dd; ++j)
          npts.push_back(pts[i * dd + j] + xv * coeff[j]);
        nms.push_back(ms[i] * x.mass(s));
      }
    }
    RationalDistribution merged(d, std::move(npts), std::move(nms));
    pts = merged.points();
    ms = merged.masses();
  }
  return RationalDistribution(d, std::move(pts), std::move(ms));
}

// ---------------------------------------------------------------------------
// concentration
// ---------------------------------------------------------------------------

namespace {

ConcentrationResult max_atom_result(const DiscreteDistribution& f, double tau) {
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.mass(i) > best) {
      best = f.mass(i);
      arg = i;
    }
  }
  ConcentrationResult r;
  r.lower = r.upper = best;
  r.tau = tau;
  r.method = ConcentrationMethod::exact_window;
  r.witness_center = std::vector<double>(f.point(arg).begin(), f.point(arg).end());
  return r;
}

ConcentrationResult window_1d(const DiscreteDistribution& f, double tau) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return f.point(a)[0] < f.point(b)[0]; });
  std::vector<double> p(f.size());
  std::vector<double> prefix(f.size() + 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    p[i] = f.point(idx[i])[0];
    prefix[i + 1] = prefix[i] + f.mass(idx[i]);
  }
  double best = 0.0;
  double center = p.empty() ? 0.0 : p[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (j < i) j = i;
    while (j + 1 < p.size() && p[j + 1] <= p[i] + tau) ++j;
    double m = prefix[j + 1] - prefix[i];
    if (m > best) {
      best = m;
      center = 0.5 * (p[i] + p[j]);
    }
  }
  ConcentrationResult r;
  r.lower = r.upper = best;
  r.tau = tau;
  r.method = ConcentrationMethod::exact_window;
  r.witness_center = std::vector<double>{center};
  return r;
}

double sq_norm_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// d >= 2 bracket: lower bound from the best Euclidean ball of radius tau/2
// centered at an atom or a pairwise midpoint; upper bound from the maximal
// mass of a 2^d block of grid cells of side tau (any ball of diameter tau
// meets at most one such block).
ConcentrationResult bracket(const DiscreteDistribution& f, double tau) {
  const int d = f.dim();
  const auto dd = static_cast<std::size_t>(d);
  const double r2 = 0.25 * tau * tau;
  const std::size_t n = f.size();

  double lower = 0.0;
  std::vector<double> wc(dd, 0.0);
  std::vector<double> cand(dd);
  auto eval_center = [&](std::span<const double> c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sq_norm_dist(f.point(i), c) <= r2 * (1.0 + 1e-15)) s += f.mass(i);
    }
    if (s > lower) {
      lower = s;
      wc.assign(c.begin(), c.end());
    }
  };
  for (std::size_t i = 0; i < n; ++i) eval_center(f.point(i));
  const std::size_t kPairCap = 2000;  // midpoint candidates are quadratic
  if (n <= kPairCap) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        auto pi = f.point(i);
        auto pk = f.point(k);
        for (std::size_t j = 0; j < dd; ++j) cand[j] = 0.5 * (pi[j] + pk[j]);
        eval_center(cand);
      }
    }
  }

  std::map<std::vector<long long>, double> cells;
  std::vector<long long> key(dd);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = f.point(i);
    for (std::size_t j = 0; j < dd; ++j)
      key[j] = static_cast<long long>(std::floor(p[j] / tau));
    cells[key] += f.mass(i);
  }
  double upper = 0.0;
  std::vector<long long> anchor(dd);
  for (const auto& [cell, _] : cells) {
    // block anchored at cell - eps for eps in {0,1}^d
    for (unsigned shift = 0; shift < (1u << dd); ++shift) {
      for (std::size_t j = 0; j < dd; ++j)
        anchor[j] = cell[j] - ((shift >> j) & 1u);
      double s = 0.0;
      for (unsigned m = 0; m < (1u << dd); ++m) {
        for (std::size_t j = 0; j < dd; ++j) key[j] = anchor[j] + ((m >> j) & 1u);
        auto it = cells.find(key);
        if (it != cells.end()) s += it->second;
      }
      upper = std::max(upper, s);
    }
  }
  upper = std::min(upper, 1.0);

  ConcentrationResult r;
  r.lower = lower;
  r.upper = std::max(upper, lower);
  r.tau = tau;
  r.method = ConcentrationMethod::bracket_candidates;
  r.witness_center = wc;
  return r;
}

}  // namespace

ConcentrationResult concentration(const DiscreteDistribution& f, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("concentration: tau must be >= 0");
  if (tau == 0.0) return max_atom_result(f, tau);
  if (f.dim() == 1) return window_1d(f, tau);
  return bracket(f, tau);
}

ExactConcentration concentration_exact(const RationalDistribution& f, const Rational& tau) {
  if (f.dim() != 1)
    throw std::invalid_argument("concentration_exact: one-dimensional laws only");
  if (tau < Rational(0)) throw std::invalid_argument("concentration_exact: tau >= 0");
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return f.point(a)[0] < f.point(b)[0]; });
  std::vector<Rational> p(idx.size());
  std::vector<Rational> prefix(idx.size() + 1, Rational(0));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    p[i] = f.point(idx[i])[0];
    prefix[i + 1] = prefix[i] + f.mass(idx[i]);
  }
  Rational best(0);
  Rational center = p[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (j < i) j = i;
    while (j + 1 < p.size() && p[j + 1] <= p[i] + tau) ++j;
    Rational m = prefix[j + 1] - prefix[i];
    if (m > best) {
      best = m;
      center = (p[i] + p[j]) / 2;
    }
  }
  return ExactConcentration{best, center};
}

CoefficientVector scale_coefficients(const CoefficientVector& a, double v) {
  return a.scaled(v);
}

RationalCoefficients scale_coefficients(const RationalCoefficients& a, const Rational& v) {
  return a.scaled(v);
}

}  // namespace conclab
