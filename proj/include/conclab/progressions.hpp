#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conclab/measures.hpp"

namespace conclab {

inline constexpr long long kVolumeCap = 1'000'000'000;
inline constexpr std::size_t kEnumerationCap = 5'000'000;
inline constexpr int kMaxLatticeRank = 6;

// ---------------------------------------------------------------------------
// Symmetric convex bodies: boxes, ellipsoids (axis radii) and finite
// intersections of slab pairs {x : |<w_i, x>| <= 1}.  Every body satisfies
// V = -V by construction.
// ---------------------------------------------------------------------------
class ConvexBody {
 public:
  enum class Kind { box, ellipsoid, slabs };

  static ConvexBody box(std::vector<double> radii);
  static ConvexBody ellipsoid(std::vector<double> radii);
  static ConvexBody slabs(int r, std::vector<std::vector<double>> normals);

  Kind kind() const { return kind_; }
  int rank() const { return r_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<std::vector<double>>& normals() const { return normals_; }

  bool contains(std::span<const double> x) const;
  // Componentwise bound: |x_j| <= result[j] for every x in the body; exact
  // for boxes/ellipsoids, vertex enumeration for slab intersections.  Throws
  // invalid_argument when the body is unbounded.
  std::vector<double> bounding_radii() const;

 private:
  Kind kind_ = Kind::box;
  int r_ = 0;
  std::vector<double> radii_;
  std::vector<std::vector<double>> normals_;
};

// Integer points of V, lexicographically ordered; bounding-box scan with
// membership filtering.  Rank capped at desk scale (r <= 6).
std::vector<std::vector<long long>> enumerate_lattice_points(
    const ConvexBody& v, std::size_t cap = kEnumerationCap);

// ---------------------------------------------------------------------------
// GAP: image of the integer box prod [L_j, U_j] under
// m -> g0 + sum_j m_j g_j.
// ---------------------------------------------------------------------------
struct GAP {
  std::vector<double> g0;                  // size d
  std::vector<std::vector<double>> gens;   // r generators, each size d
  std::vector<long long> lo;
  std::vector<long long> hi;

  int dim() const { return static_cast<int>(g0.size()); }
  int rank() const { return static_cast<int>(gens.size()); }
  long long volume() const;  // prod (U_j - L_j + 1), capped
  bool symmetric() const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// CGAP: product of per-coordinate blocks; block j contributes coordinate
// values offset_j + <nu_j, h_j> with nu_j ranging over Z^{r_j} cap V_j.  A
// pure (offset-free) CGAP has every offset equal to zero; shifted blocks
// serve as the working class of the progression-fitting routines.
// ---------------------------------------------------------------------------
struct CgapBlock {
  std::vector<double> h;
  ConvexBody body;
  double offset = 0.0;
};

struct CGAP {
  std::vector<CgapBlock> blocks;
  std::size_t m_cap = kEnumerationCap;

  int dim() const { return static_cast<int>(blocks.size()); }
  int rank() const;
  bool pure() const;  // all offsets zero
  void validate() const;

  static CGAP rank1(double h, double offset, long long half_width);
};

// ---------------------------------------------------------------------------
// SignedCube K_1(u) = { sum_j n_j u_j : n_j in {-1,0,1} }; a symmetric GAP of
// rank r and volume 3^r.
// ---------------------------------------------------------------------------
struct SignedCube {
  std::vector<std::vector<double>> u;  // r generators, each size d
  int dim() const { return u.empty() ? 1 : static_cast<int>(u.front().size()); }
  int rank() const { return static_cast<int>(u.size()); }

  GAP as_gap() const;
  CGAP as_cgap() const;  // one-dimensional cubes only
};

// ---------------------------------------------------------------------------
// Enumerated point sets with multiplicity (non-proper progressions are
// first-class values).
// ---------------------------------------------------------------------------
struct PointSet {
  int d = 1;
  std::vector<double> points;           // row-major, distinct after merging
  std::vector<long long> multiplicity;  // enumeration count per point
  long long volume = 0;                 // map-domain cardinality

  std::size_t size() const { return multiplicity.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(d),
            static_cast<std::size_t>(d)};
  }
  bool proper() const {
    return static_cast<long long>(size()) == volume;
  }
};

PointSet points_of(const GAP& k, std::size_t cap = kEnumerationCap);
PointSet points_of(const CGAP& k, std::size_t cap = kEnumerationCap);
PointSet points_of(const SignedCube& k, std::size_t cap = kEnumerationCap);

// min over y in K of |x - y| (max-norm); x is inside [K]_tau iff <= tau.
double neighborhood_distance(std::span<const double> x, const PointSet& k);

struct CoverCount {
  std::size_t covered = 0;
  std::vector<std::size_t> outliers;  // index order
};
CoverCount cover_count(const CoefficientVector& a, const PointSet& k, double tau);

struct EmbedResult {
  GAP gap;
  double volume_ratio;  // Vol(gap) / |K|
};
// Symmetric GAP on the block generators with box bounds taken as the
// componentwise max over the enumerated lattice points; contains the CGAP.
EmbedResult embed_cgap_in_gap(const CGAP& k, std::size_t cap = kEnumerationCap);

// Assemble a d-dimensional progression from d one-dimensional parts; every
// generator of the result is nonzero in exactly one coordinate.
GAP product(const std::vector<GAP>& parts);
CGAP product(const std::vector<CGAP>& parts);
SignedCube product(const std::vector<SignedCube>& parts);

// Proper K* with the same volume and dimensions, [K]_tau inside [K*]_{2tau};
// deterministic prime-weighted perturbations first, seeded retries after.
GAP properize(const GAP& k, double tau, std::uint64_t seed = 0);
SignedCube properize(const SignedCube& k, double tau, std::uint64_t seed = 0);

}  // namespace conclab
