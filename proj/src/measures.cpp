#include "conclab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace conclab {

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

double max_norm_dist(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

namespace {

double scale_of(const std::vector<double>& coords) {
  double m = 0.0;
  for (double v : coords) m = std::max(m, std::fabs(v));
  return m;
}

// Sort lexicographically, then cluster runs whose every coordinate lies
// within tol of the cluster representative.  Weights accumulate; the
// representative point is kept verbatim.
void merge_atoms(int d, std::vector<double>& points, std::vector<double>& weights,
                 double tol) {
  const std::size_t n = weights.size();
  if (n == 0) return;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const auto dd = static_cast<std::size_t>(d);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < dd; ++j) {
      double x = points[a * dd + j], y = points[b * dd + j];
      if (x != y) return x < y;
    }
    return false;
  });
  std::vector<double> out_p;
  std::vector<double> out_w;
  out_p.reserve(points.size());
  out_w.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = idx[r];
    bool joined = false;
    if (!out_w.empty()) {
      std::size_t last = out_w.size() - 1;
      bool close = true;
      for (std::size_t j = 0; j < dd; ++j) {
        if (std::fabs(points[i * dd + j] - out_p[last * dd + j]) > tol) {
          close = false;
          break;
        }
      }
      if (close) {
        out_w[last] += weights[i];
        joined = true;
      }
    }
    if (!joined) {
      for (std::size_t j = 0; j < dd; ++j) out_p.push_back(points[i * dd + j]);
      out_w.push_back(weights[i]);
    }
  }
  points = std::move(out_p);
  weights = std::move(out_w);
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CoefficientVector
// ---------------------------------------------------------------------------

CoefficientVector::CoefficientVector(std::vector<double> entries, int d)
    : d_(d), entries_(std::move(entries)) {
  if (d_ < 1) throw std::invalid_argument("CoefficientVector: d must be >= 1");
  if (entries_.empty() || entries_.size() % static_cast<std::size_t>(d_) != 0)
    throw std::invalid_argument("CoefficientVector: entry count not a multiple of d");
  n_ = entries_.size() / static_cast<std::size_t>(d_);
  check_finite(entries_, "CoefficientVector");
  bool any_nonzero = false;
  for (double v : entries_) any_nonzero = any_nonzero || v != 0.0;
  if (!any_nonzero) throw std::invalid_argument("CoefficientVector: all entries zero");
}

CoefficientVector CoefficientVector::from_scalars(std::vector<double> values) {
  return CoefficientVector(std::move(values), 1);
}

std::vector<double> CoefficientVector::coordinate_slice(int j) const {
  if (j < 0 || j >= d_) throw std::out_of_range("CoefficientVector: coordinate index");
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = entries_[k * d_ + j];
  return out;
}

CoefficientVector CoefficientVector::scaled(double v) const {
  if (!(v > 0.0)) throw std::invalid_argument("scale factor must be positive");
  std::vector<double> e(entries_);
  for (double& x : e) x *= v;
  return CoefficientVector(std::move(e), d_);
}

double CoefficientVector::max_abs_coordinate() const { return scale_of(entries_); }

// ---------------------------------------------------------------------------
// DiscreteDistribution
// ---------------------------------------------------------------------------

DiscreteDistribution::DiscreteDistribution(int d, std::vector<double> points,
                                           std::vector<double> masses)
    : d_(d), points_(std::move(points)), masses_(std::move(masses)) {
  if (d_ < 1) throw std::invalid_argument("DiscreteDistribution: d must be >= 1");
  if (masses_.empty() || points_.size() != masses_.size() * static_cast<std::size_t>(d_))
    throw std::invalid_argument("DiscreteDistribution: point/mass size mismatch");
  check_finite(points_, "DiscreteDistribution");
  for (double m : masses_) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("DiscreteDistribution: negative or non-finite mass");
  }
  merge_tol_ = kMergeRelTol * (1.0 + scale_of(points_));
  merge_atoms(d_, points_, masses_, merge_tol_);
  // drop exact-zero atoms produced by callers; strictly positive masses remain
  std::vector<double> p2;
  std::vector<double> m2;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (masses_[i] > 0.0) {
      for (int j = 0; j < d_; ++j) p2.push_back(points_[i * d_ + j]);
      m2.push_back(masses_[i]);
    }
  }
  points_ = std::move(p2);
  masses_ = std::move(m2);
  if (masses_.empty())
    throw std::invalid_argument("DiscreteDistribution: no positive-mass atoms");
  double s = 0.0, c = 0.0;
  for (double m : masses_) {  // Neumaier summation
    double t = s + m;
    c += (std::fabs(s) >= std::fabs(m)) ? (s - t) + m : (m - t) + s;
    s = t;
  }
  if (std::fabs((s + c) - 1.0) > kMassSumTol)
    throw std::invalid_argument("DiscreteDistribution: masses do not sum to 1");
}

double DiscreteDistribution::mass_at(std::span<const double> x) const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (max_norm_dist(point(i), x) <= merge_tol_) return masses_[i];
  }
  return 0.0;
}

bool DiscreteDistribution::is_symmetric(double tol) const {
  std::vector<double> neg(static_cast<std::size_t>(d_));
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = point(i);
    for (int j = 0; j < d_; ++j) neg[j] = -p[j];
    if (std::fabs(mass_at(neg) - masses_[i]) > tol * (1.0 + masses_[i])) return false;
  }
  return true;
}

DiscreteDistribution rademacher() {
  return DiscreteDistribution(1, {-1.0, 1.0}, {0.5, 0.5});
}

DiscreteDistribution lazy_rademacher(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("lazy_rademacher: p in [0,1]");
  if (p == 0.0) return point_mass({0.0});
  if (p == 1.0) return rademacher();
  return DiscreteDistribution(1, {-1.0, 0.0, 1.0}, {p / 2, 1.0 - p, p / 2});
}

DiscreteDistribution point_mass(std::vector<double> x) {
  int d = static_cast<int>(x.size());
  return DiscreteDistribution(d, std::move(x), {1.0});
}

DiscreteDistribution uniform_on(int d, std::vector<double> points) {
  std::size_t n = points.size() / static_cast<std::size_t>(d);
  std::vector<double> masses(n, 1.0 / static_cast<double>(n));
  return DiscreteDistribution(d, std::move(points), std::move(masses));
}

// ---------------------------------------------------------------------------
// SpectralMeasure
// ---------------------------------------------------------------------------

SpectralMeasure::SpectralMeasure(int d, std::vector<double> points,
                                 std::vector<double> weights)
    : d_(d), points_(std::move(points)), weights_(std::move(weights)) {
  if (d_ < 1) throw std::invalid_argument("SpectralMeasure: d must be >= 1");
  if (points_.size() != weights_.size() * static_cast<std::size_t>(d_))
    throw std::invalid_argument("SpectralMeasure: point/weight size mismatch");
  check_finite(points_, "SpectralMeasure");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("SpectralMeasure: negative or non-finite weight");
  }
  merge_tol_ = kMergeRelTol * (1.0 + scale_of(points_));
  merge_atoms(d_, points_, weights_, merge_tol_);
  total_ = 0.0;
  double c = 0.0;
  for (double w : weights_) {
    double t = total_ + w;
    c += (std::fabs(total_) >= std::fabs(w)) ? (total_ - t) + w : (w - t) + total_;
    total_ = t;
  }
  total_ += c;
}

SpectralMeasure SpectralMeasure::scaled(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("SpectralMeasure: negative scale");
  std::vector<double> w(weights_);
  for (double& x : w) x *= factor;
  return SpectralMeasure(d_, points_, std::move(w));
}

bool SpectralMeasure::is_symmetric(double tol) const {
  std::vector<double> neg(static_cast<std::size_t>(d_));
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = point(i);
    for (int j = 0; j < d_; ++j) neg[j] = -p[j];
    double w_neg = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
      if (max_norm_dist(point(k), neg) <= merge_tol_) {
        w_neg = weights_[k];
        break;
      }
    }
    if (std::fabs(w_neg - weights_[i]) > tol * (1.0 + weights_[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CompoundPoissonSpec
// ---------------------------------------------------------------------------

CompoundPoissonSpec::CompoundPoissonSpec(SpectralMeasure levy) : levy_(std::move(levy)) {
  if (!levy_.is_symmetric())
    throw std::invalid_argument("CompoundPoissonSpec: Levy measure must be symmetric");
}

DiscreteDistribution CompoundPoissonSpec::base() const {
  double a = alpha();
  if (a <= 0.0) return point_mass(std::vector<double>(levy_.dim(), 0.0));
  std::vector<double> masses(levy_.weights());
  for (double& m : masses) m /= a;
  return DiscreteDistribution(levy_.dim(), levy_.points(), std::move(masses));
}

CompoundPoissonSpec weighted_sum_levy_spec(const CoefficientVector& a, double lambda,
                                           double z) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const int d = a.dim();
  std::vector<double> pts;
  std::vector<double> wts;
  pts.reserve(2 * a.size() * static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto e = a.entry(k);
    for (int j = 0; j < d; ++j) pts.push_back(z * e[j]);
    wts.push_back(lambda / 4.0);
    for (int j = 0; j < d; ++j) pts.push_back(-z * e[j]);
    wts.push_back(lambda / 4.0);
  }
  return CompoundPoissonSpec(SpectralMeasure(d, std::move(pts), std::move(wts)));
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

DiscreteDistribution symmetrize(const DiscreteDistribution& x, std::size_t atom_cap) {
  const std::size_t n = x.size();
  if (n * n > atom_cap)
    throw cap_exceeded("symmetrize: |support|^2 exceeds atom cap");
  const int d = x.dim();
  std::vector<double> pts;
  std::vector<double> ms;
  pts.reserve(n * n * static_cast<std::size_t>(d));
  ms.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pi = x.point(i);
    for (std::size_t k = 0; k < n; ++k) {
      auto pk = x.point(k);
      for (int j = 0; j < d; ++j) pts.push_back(pi[j] - pk[j]);
      ms.push_back(x.mass(i) * x.mass(k));
    }
  }
  return DiscreteDistribution(d, std::move(pts), std::move(ms));
}

double tail_mass(const DiscreteDistribution& g, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("tail_mass: delta must be >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (max_norm(g.point(i)) > delta) s += g.mass(i);
  }
  return s;
}

SpectralTriple spectral_measures(const CoefficientVector& a, double scale) {
  if (!(scale >= 0.0 && scale <= 1.0))
    throw std::invalid_argument("spectral_measures: scale in [0,1]");
  const int d = a.dim();
  std::vector<double> pts2;
  std::vector<double> w2;
  std::vector<double> pts1;
  std::vector<double> w1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto e = a.entry(k);
    for (int j = 0; j < d; ++j) pts1.push_back(e[j]);
    w1.push_back(1.0);
    for (int j = 0; j < d; ++j) pts2.push_back(e[j]);
    w2.push_back(1.0);
    for (int j = 0; j < d; ++j) pts2.push_back(-e[j]);
    w2.push_back(1.0);
  }
  SpectralMeasure two(d, std::move(pts2), std::move(w2));
  SpectralMeasure one(d, std::move(pts1), std::move(w1));
  SpectralMeasure scaled = two.scaled(scale / 4.0);
  return SpectralTriple{std::move(two), std::move(one), std::move(scaled)};
}

SpreadCheck check_spread_condition(const DiscreteDistribution& g, double c1, double c2,
                                   double c3) {
  if (!(c1 >= 0.0) || !(c1 < c2)) throw std::invalid_argument("spread: need 0 <= C1 < C2");
  if (!(c3 >= 0.0 && c3 <= 1.0)) throw std::invalid_argument("spread: C3 in [0,1]");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = max_norm(g.point(i));
    if (r > c1 && r < c2) s += g.mass(i);
  }
  return SpreadCheck{s >= c3, s};
}

DiscreteDistribution coordinate_projection(const DiscreteDistribution& f, int j) {
  if (j < 0 || j >= f.dim()) throw std::out_of_range("coordinate_projection: index");
  std::vector<double> pts(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) pts[i] = f.point(i)[j];
  return DiscreteDistribution(1, std::move(pts), f.masses());
}

SpectralMeasure coordinate_projection(const SpectralMeasure& m, int j) {
  if (j < 0 || j >= m.dim()) throw std::out_of_range("coordinate_projection: index");
  std::vector<double> pts(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) pts[i] = m.point(i)[j];
  return SpectralMeasure(1, std::move(pts), m.weights());
}

CoefficientVector coordinate_projection(const CoefficientVector& a, int j) {
  return CoefficientVector(a.coordinate_slice(j), 1);
}

// ---------------------------------------------------------------------------
// Rational twins
// ---------------------------------------------------------------------------

namespace {

void merge_atoms_exact(int d, std::vector<Rational>& points,
                       std::vector<Rational>& weights) {
  const std::size_t n = weights.size();
  if (n == 0) return;
  const auto dd = static_cast<std::size_t>(d);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < dd; ++j) {
      const Rational &x = points[a * dd + j], &y = points[b * dd + j];
      if (x != y) return x < y;
    }
    return false;
  });
  std::vector<Rational> out_p;
  std::vector<Rational> out_w;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = idx[r];
    bool joined = false;
    if (!out_w.empty()) {
      std::size_t last = out_w.size() - 1;
      bool same = true;
      for (std::size_t j = 0; j < dd; ++j) {
        if (!(points[i * dd + j] == out_p[last * dd + j])) {
          same = false;
          break;
        }
      }
      if (same) {
        out_w[last] += weights[i];
        joined = true;
      }
    }
    if (!joined) {
      for (std::size_t j = 0; j < dd; ++j) out_p.push_back(points[i * dd + j]);
      out_w.push_back(weights[i]);
    }
  }
  points = std::move(out_p);
  weights = std::move(out_w);
}

}  // namespace

RationalCoefficients::RationalCoefficients(std::vector<Rational> entries, int d)
    : d_(d), entries_(std::move(entries)) {
  if (d_ < 1) throw std::invalid_argument("RationalCoefficients: d must be >= 1");
  if (entries_.empty() || entries_.size() % static_cast<std::size_t>(d_) != 0)
    throw std::invalid_argument("RationalCoefficients: entry count not a multiple of d");
  n_ = entries_.size() / static_cast<std::size_t>(d_);
  bool any = false;
  for (const auto& e : entries_) any = any || !e.is_zero();
  if (!any) throw std::invalid_argument("RationalCoefficients: all entries zero");
}

RationalCoefficients RationalCoefficients::from_integers(
    const std::vector<std::int64_t>& v) {
  std::vector<Rational> e;
  e.reserve(v.size());
  for (auto x : v) e.emplace_back(x);
  return RationalCoefficients(std::move(e), 1);
}

std::vector<Rational> RationalCoefficients::coordinate_slice(int j) const {
  if (j < 0 || j >= d_) throw std::out_of_range("RationalCoefficients: coordinate index");
  std::vector<Rational> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = entries_[k * d_ + j];
  return out;
}

RationalCoefficients RationalCoefficients::scaled(const Rational& v) const {
  if (!(v > Rational(0))) throw std::invalid_argument("scale factor must be positive");
  std::vector<Rational> e(entries_);
  for (auto& x : e) x *= v;
  return RationalCoefficients(std::move(e), d_);
}

CoefficientVector RationalCoefficients::to_double() const {
  std::vector<double> e(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) e[i] = entries_[i].to_double();
  return CoefficientVector(std::move(e), d_);
}

std::optional<RationalCoefficients> RationalCoefficients::reconstruct(
    const CoefficientVector& a, std::int64_t max_den) {
  std::vector<Rational> e;
  e.reserve(a.data().size());
  for (double x : a.data()) {
    auto r = Rational::from_double(x, max_den);
    if (!r) return std::nullopt;
    e.push_back(*r);
  }
  return RationalCoefficients(std::move(e), a.dim());
}

RationalDistribution::RationalDistribution(int d, std::vector<Rational> points,
                                           std::vector<Rational> masses)
    : d_(d), points_(std::move(points)), masses_(std::move(masses)) {
  if (d_ < 1) throw std::invalid_argument("RationalDistribution: d must be >= 1");
  if (masses_.empty() || points_.size() != masses_.size() * static_cast<std::size_t>(d_))
    throw std::invalid_argument("RationalDistribution: point/mass size mismatch");
  merge_atoms_exact(d_, points_, masses_);
  std::vector<Rational> p2;
  std::vector<Rational> m2;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (masses_[i].sign() < 0)
      throw std::invalid_argument("RationalDistribution: negative mass");
    if (masses_[i].sign() > 0) {
      for (int j = 0; j < d_; ++j) p2.push_back(points_[i * d_ + j]);
      m2.push_back(masses_[i]);
    }
  }
  points_ = std::move(p2);
  masses_ = std::move(m2);
  if (masses_.empty())
    throw std::invalid_argument("RationalDistribution: no positive-mass atoms");
  Rational s(0);
  for (const auto& m : masses_) s += m;
  if (!(s == Rational(1)))
    throw std::invalid_argument("RationalDistribution: masses must sum to 1 exactly");
}

Rational RationalDistribution::mass_at(std::span<const Rational> x) const {
  for (std::size_t i = 0; i < size(); ++i) {
    bool same = true;
    auto p = point(i);
    for (int j = 0; j < d_; ++j) {
      if (!(p[j] == x[j])) {
        same = false;
        break;
      }
    }
    if (same) return masses_[i];
  }
  return Rational(0);
}

DiscreteDistribution RationalDistribution::to_double() const {
  std::vector<double> pts(points_.size());
  std::vector<double> ms(masses_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) pts[i] = points_[i].to_double();
  for (std::size_t i = 0; i < masses_.size(); ++i) ms[i] = masses_[i].to_double();
  return DiscreteDistribution(d_, std::move(pts), std::move(ms));
}

RationalDistribution rademacher_exact() {
  return RationalDistribution(1, {Rational(-1), Rational(1)},
                              {Rational(1, 2), Rational(1, 2)});
}

RationalDistribution lazy_rademacher_exact(const Rational& p) {
  if (p < Rational(0) || p > Rational(1))
    throw std::invalid_argument("lazy_rademacher_exact: p in [0,1]");
  if (p.is_zero()) return point_mass_exact({Rational(0)});
  if (p == Rational(1)) return rademacher_exact();
  return RationalDistribution(1, {Rational(-1), Rational(0), Rational(1)},
                              {p / 2, Rational(1) - p, p / 2});
}

RationalDistribution point_mass_exact(std::vector<Rational> x) {
  int d = static_cast<int>(x.size());
  return RationalDistribution(d, std::move(x), {Rational(1)});
}

RationalDistribution symmetrize(const RationalDistribution& x, std::size_t atom_cap) {
  const std::size_t n = x.size();
  if (n * n > atom_cap)
    throw cap_exceeded("symmetrize: |support|^2 exceeds atom cap");
  const int d = x.dim();
  std::vector<Rational> pts;
  std::vector<Rational> ms;
  pts.reserve(n * n * static_cast<std::size_t>(d));
  ms.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pi = x.point(i);
    for (std::size_t k = 0; k < n; ++k) {
      auto pk = x.point(k);
      for (int j = 0; j < d; ++j) pts.push_back(pi[j] - pk[j]);
      ms.push_back(x.mass(i) * x.mass(k));
    }
  }
  return RationalDistribution(d, std::move(pts), std::move(ms));
}

Rational tail_mass(const RationalDistribution& g, const Rational& delta) {
  if (delta < Rational(0)) throw std::invalid_argument("tail_mass: delta must be >= 0");
  Rational s(0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.point(i);
    Rational r(0);
    for (int j = 0; j < g.dim(); ++j) r = std::max(r, p[j].abs());
    if (r > delta) s += g.mass(i);
  }
  return s;
}

RationalDistribution coordinate_projection(const RationalDistribution& f, int j) {
  if (j < 0 || j >= f.dim()) throw std::out_of_range("coordinate_projection: index");
  std::vector<Rational> pts(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) pts[i] = f.point(i)[j];
  return RationalDistribution(1, std::move(pts), f.masses());
}

}  // namespace conclab
