#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "conclab/rational.hpp"

namespace conclab {

// Relative tolerance for merging coinciding atoms and for mass-sum checks.
inline constexpr double kMergeRelTol = 1e-12;
inline constexpr double kMassSumTol = 1e-12;
inline constexpr std::size_t kDefaultAtomCap = 5'000'000;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// |x| = max_j |x_j|; the default norm for neighborhoods and tails.
double max_norm(std::span<const double> x);
double max_norm_dist(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// CoefficientVector: the multiset a = (a_1, ..., a_n) of d-dimensional
// weights defining the sum S_a = sum_k X_k a_k.  Multiplicity is preserved;
// entries are never deduplicated.
// ---------------------------------------------------------------------------
class CoefficientVector {
 public:
  // entries is row-major n x d; requires n >= 1, d >= 1, all finite, and at
  // least one nonzero entry.
  CoefficientVector(std::vector<double> entries, int d);
  static CoefficientVector from_scalars(std::vector<double> values);

  std::size_t size() const { return n_; }
  int dim() const { return d_; }
  std::span<const double> entry(std::size_t k) const {
    return {entries_.data() + k * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }
  const std::vector<double>& data() const { return entries_; }
  std::vector<double> coordinate_slice(int j) const;  // a^{(j)}, 0-based j
  CoefficientVector scaled(double v) const;
  double max_abs_coordinate() const;

 private:
  std::size_t n_;
  int d_;
  std::vector<double> entries_;
};

// ---------------------------------------------------------------------------
// DiscreteDistribution: finite atomic probability law.  Atoms are merged on
// construction (max-norm distance <= 1e-12 * (1 + max coordinate magnitude)),
// masses are strictly positive and sum to 1 within 1e-12.
// ---------------------------------------------------------------------------
class DiscreteDistribution {
 public:
  DiscreteDistribution(int d, std::vector<double> points, std::vector<double> masses);

  int dim() const { return d_; }
  std::size_t size() const { return masses_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }
  double mass(std::size_t i) const { return masses_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }

  double mass_at(std::span<const double> x) const;  // 0 when x is not an atom
  bool is_symmetric(double tol = kMassSumTol) const;
  double merge_tolerance() const { return merge_tol_; }

 private:
  int d_;
  std::vector<double> points_;
  std::vector<double> masses_;
  double merge_tol_;
};

DiscreteDistribution rademacher();
// P{X = 0} = 1 - p, P{X = +-1} = p/2 each; p in [0, 1]
DiscreteDistribution lazy_rademacher(double p);
DiscreteDistribution point_mass(std::vector<double> x);
DiscreteDistribution uniform_on(int d, std::vector<double> points);

// ---------------------------------------------------------------------------
// SpectralMeasure: finite nonnegative atomic measure (not normalized).
// ---------------------------------------------------------------------------
class SpectralMeasure {
 public:
  SpectralMeasure(int d, std::vector<double> points, std::vector<double> weights);

  int dim() const { return d_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_mass() const { return total_; }

  SpectralMeasure scaled(double factor) const;
  bool is_symmetric(double tol = kMassSumTol) const;
  double merge_tolerance() const { return merge_tol_; }

 private:
  int d_;
  std::vector<double> points_;
  std::vector<double> weights_;
  double total_;
  double merge_tol_;
};

// ---------------------------------------------------------------------------
// CompoundPoissonSpec: symmetric finite Levy measure nu; the law has
// characteristic function exp(integral (cos<t,x> - 1) nu(dx)), equivalently
// rate alpha = nu(R^d) with jump law W = nu / alpha.
// ---------------------------------------------------------------------------
class CompoundPoissonSpec {
 public:
  explicit CompoundPoissonSpec(SpectralMeasure levy);

  const SpectralMeasure& levy() const { return levy_; }
  int dim() const { return levy_.dim(); }
  double alpha() const { return levy_.total_mass(); }
  DiscreteDistribution base() const;  // W; point mass at 0 when alpha == 0

 private:
  SpectralMeasure levy_;
};

// The symmetric smoothing law attached to a coefficient vector: Levy measure
// (lambda/4) * sum_k (E_{z a_k} + E_{-z a_k}).
CompoundPoissonSpec weighted_sum_levy_spec(const CoefficientVector& a,
                                           double lambda, double z = 1.0);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Law of X1 - X2 for independent copies; |supp|^2 pairs enumerated.
DiscreteDistribution symmetrize(const DiscreteDistribution& x,
                                std::size_t atom_cap = kDefaultAtomCap);

// p(delta) = G{ |z| > delta } (strict inequality, max-norm).
double tail_mass(const DiscreteDistribution& g, double delta);

struct SpectralTriple {
  SpectralMeasure two_sided;   // sum_k (E_{a_k} + E_{-a_k}), total mass 2n
  SpectralMeasure one_sided;   // sum_k E_{a_k}, total mass n
  SpectralMeasure tail_scaled; // (scale/4) * two_sided
};
SpectralTriple spectral_measures(const CoefficientVector& a, double scale);

struct SpreadCheck {
  bool satisfied;
  double mass;
};
// Mass of the open annulus {C1 < |x| < C2} compared against C3.
SpreadCheck check_spread_condition(const DiscreteDistribution& g, double c1,
                                   double c2, double c3);

DiscreteDistribution coordinate_projection(const DiscreteDistribution& f, int j);
SpectralMeasure coordinate_projection(const SpectralMeasure& m, int j);
CoefficientVector coordinate_projection(const CoefficientVector& a, int j);

// ---------------------------------------------------------------------------
// Exact-rational twins.  Points and masses are Rational; merging is exact
// equality; mass sums are exact.  This is the default mode for zero-tolerance
// verification of Rademacher-type instances (n <= 24).
// ---------------------------------------------------------------------------
class RationalCoefficients {
 public:
  RationalCoefficients(std::vector<Rational> entries, int d);
  static RationalCoefficients from_integers(const std::vector<std::int64_t>& v);

  std::size_t size() const { return n_; }
  int dim() const { return d_; }
  std::span<const Rational> entry(std::size_t k) const {
    return {entries_.data() + k * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }
  std::vector<Rational> coordinate_slice(int j) const;
  RationalCoefficients scaled(const Rational& v) const;
  CoefficientVector to_double() const;
  static std::optional<RationalCoefficients> reconstruct(
      const CoefficientVector& a, std::int64_t max_den = 1'000'000);

 private:
  std::size_t n_;
  int d_;
  std::vector<Rational> entries_;
};

class RationalDistribution {
 public:
  RationalDistribution(int d, std::vector<Rational> points,
                       std::vector<Rational> masses);

  int dim() const { return d_; }
  std::size_t size() const { return masses_.size(); }
  std::span<const Rational> point(std::size_t i) const {
    return {points_.data() + i * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }
  const Rational& mass(std::size_t i) const { return masses_[i]; }
  const std::vector<Rational>& points() const { return points_; }
  const std::vector<Rational>& masses() const { return masses_; }

  Rational mass_at(std::span<const Rational> x) const;
  DiscreteDistribution to_double() const;

 private:
  int d_;
  std::vector<Rational> points_;
  std::vector<Rational> masses_;
};

RationalDistribution rademacher_exact();
RationalDistribution lazy_rademacher_exact(const Rational& p);
RationalDistribution point_mass_exact(std::vector<Rational> x);

RationalDistribution symmetrize(const RationalDistribution& x,
                                std::size_t atom_cap = kDefaultAtomCap);
Rational tail_mass(const RationalDistribution& g, const Rational& delta);
RationalDistribution coordinate_projection(const RationalDistribution& f, int j);

}  // namespace conclab
